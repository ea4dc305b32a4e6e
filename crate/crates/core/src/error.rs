//! Crate-wide error type.

/// Errors produced by parsing, validation, and the numeric engines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Protograph or alist text did not match the grammar.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A structural invariant of the input is violated.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Enumeration caps (n <= 16, k <= 12) would be exceeded.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    /// A probability or mutual information left its legal range by more than
    /// the internal tolerance; indicates a construction bug, not bad input.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The operation is defined only for a restricted input class.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A randomized search exhausted its retry budget.
    #[error("search failed: {0}")]
    Search(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
