//! Protograph LDPC code design and certification.
//!
//! This crate models protographs (small multi-edge Tanner graphs, optionally
//! with generalized component codes at nodes and punctured variables), and
//! provides the analyses a code designer chains together:
//!
//! - density evolution over the binary erasure channel and its bit-error
//!   threshold ([`debec`]),
//! - certification that the block-error threshold equals the bit-error
//!   threshold, via graph reduction and decay-set propagation ([`certify`]),
//! - EXIT-based thresholds over the binary-input AWGN channel ([`pexit`]),
//! - differential-evolution search over base matrices under the block
//!   certificate ([`optimize`]),
//! - quasi-cyclic lifting to finite codes and Monte-Carlo erasure-decoding
//!   validation ([`lift`], [`sim`]).
//!
//! All analysis values are probabilities in [0,1]; polynomial coefficients
//! are exact integers so that classification logic never rests on
//! floating-point cancellation.

#![forbid(unsafe_code)]

pub mod alist;
pub mod certify;
pub mod code;
pub mod debec;
pub mod error;
pub mod lift;
pub mod optimize;
pub mod pexit;
pub mod poly;
pub mod protograph;
pub mod sim;

pub use code::BinaryLinearCode;
pub use error::{Error, Result};
pub use poly::{ChannelPolynomial, MinDegreeProfile, MultilinearPolynomial};
pub use protograph::{EdgeSocket, Protograph, RateReport, ValidationReport};
