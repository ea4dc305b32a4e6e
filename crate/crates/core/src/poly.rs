//! Exact multilinear polynomials for extrinsic MAP erasure functions.
//!
//! The erasure probability leaving a component-code position is a multilinear
//! polynomial (a union probability) in the other positions' erasure
//! probabilities. Coefficients are kept as exact integers because edge
//! classification reads coefficients, not values: a term that cancels to zero
//! must vanish exactly.

use crate::code::BinaryLinearCode;
use crate::error::{Error, Result};

/// Slack allowed before an evaluation outside [0,1] is treated as a bug.
pub const EVAL_TOLERANCE: f64 = 1e-12;

/// A multilinear polynomial over `num_vars` named inputs. Terms map variable
/// subsets (bitmasks) to nonzero integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPolynomial {
    num_vars: usize,
    terms: Vec<(u32, i64)>,
}

impl MultilinearPolynomial {
    /// Interpolates the unique multilinear polynomial matching a {0,1}-valued
    /// indicator on every subset of the variables (fast Moebius transform).
    pub fn from_indicator(num_vars: usize, indicator: impl Fn(u32) -> bool) -> Self {
        assert!(num_vars <= 24, "indicator expansion over 2^{num_vars} subsets");
        let size = 1usize << num_vars;
        let mut f: Vec<i64> = (0..size).map(|m| indicator(m as u32) as i64).collect();
        for i in 0..num_vars {
            let bit = 1usize << i;
            for mask in 0..size {
                if mask & bit != 0 {
                    f[mask] -= f[mask ^ bit];
                }
            }
        }
        let terms = f
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(m, c)| (m as u32, c))
            .collect();
        Self { num_vars, terms }
    }

    pub fn from_terms(num_vars: usize, mut terms: Vec<(u32, i64)>) -> Self {
        terms.retain(|&(_, c)| c != 0);
        terms.sort_unstable_by_key(|&(m, _)| m);
        Self { num_vars, terms }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Terms as (variable-subset mask, coefficient), sorted by mask.
    pub fn terms(&self) -> &[(u32, i64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact evaluation; values must be probabilities. Results are clamped to
    /// [0,1] only when they stray by at most `EVAL_TOLERANCE`.
    pub fn evaluate(&self, vals: &[f64]) -> Result<f64> {
        debug_assert_eq!(vals.len(), self.num_vars);
        let v = self.eval_unchecked(vals);
        if (-EVAL_TOLERANCE..=1.0 + EVAL_TOLERANCE).contains(&v) {
            Ok(v.clamp(0.0, 1.0))
        } else {
            Err(Error::Numeric(format!(
                "polynomial evaluated to {v}, outside [0,1] beyond tolerance"
            )))
        }
    }

    /// Raw evaluation without the probability-range contract.
    pub fn eval_unchecked(&self, vals: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(mask, coeff) in &self.terms {
            let mut prod = coeff as f64;
            let mut m = mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                prod *= vals[i];
                m &= m - 1;
            }
            acc += prod;
        }
        acc
    }

    /// Exact value on a {0,1} assignment given as a mask of ones.
    pub fn eval_mask(&self, ones: u32) -> i64 {
        self.terms
            .iter()
            .filter(|&&(m, _)| m & !ones == 0)
            .map(|&(_, c)| c)
            .sum()
    }
}

/// Extrinsic MAP erasure polynomial of position `pos` (0-based): the
/// probability that the MAP decoder leaves `pos` erased given that every
/// other position is erased independently with its variable's probability.
/// The polynomial is over `c.len()` variables; `pos` itself never appears.
///
/// A pattern S of erased positions keeps `pos` erased iff some codeword w
/// with w[pos]=1 has supp(w)\{pos} inside S: then w is a confusion pattern
/// the decoder cannot rule out.
pub fn extrinsic_erasure_polynomial(c: &BinaryLinearCode, pos: usize) -> MultilinearPolynomial {
    assert!(pos < c.len());
    let pos_bit = 1u32 << pos;
    let supports: Vec<u32> = c
        .enumerate_codewords()
        .into_iter()
        .filter(|cw| cw & pos_bit != 0)
        .map(|cw| cw & !pos_bit)
        .collect();
    MultilinearPolynomial::from_indicator(c.len(), move |mask| {
        let erased = mask & !pos_bit;
        supports.iter().any(|&s| s & !erased == 0)
    })
}

/// Per-position minimum total degree of the extrinsic erasure polynomial and
/// its degree-1 monomials (variable index, coefficient). `min_degree` is
/// `None` when the polynomial is identically zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinDegreeProfile {
    pub positions: Vec<PositionDegree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionDegree {
    pub min_degree: Option<usize>,
    pub degree_one: Vec<(usize, i64)>,
}

/// Degree profile of a code's extrinsic erasure polynomials, counting every
/// variable (the check-node reading).
pub fn min_degree_profile(c: &BinaryLinearCode) -> MinDegreeProfile {
    let positions = (0..c.len())
        .map(|pos| position_degree(&extrinsic_erasure_polynomial(c, pos), u32::MAX))
        .collect();
    MinDegreeProfile { positions }
}

fn position_degree(p: &MultilinearPolynomial, counted: u32) -> PositionDegree {
    let min_degree = p
        .terms()
        .iter()
        .map(|&(m, _)| (m & counted).count_ones() as usize)
        .min();
    let degree_one = p
        .terms()
        .iter()
        .filter(|&&(m, _)| (m & counted).count_ones() == 1 && m & !counted == 0)
        .map(|&(m, c)| ((m & counted).trailing_zeros() as usize, c))
        .collect();
    PositionDegree { min_degree, degree_one }
}

/// Polynomial over edge variables whose coefficients are exact integer
/// polynomials in the channel erasure probability. This is the form edge
/// classification works on: channel slots of a variable node collapse onto
/// powers of the channel probability (or onto 1 when the node is punctured),
/// and cancellation happens exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelPolynomial {
    num_edge_vars: usize,
    /// (edge mask, coefficients by channel power), sorted by mask; the
    /// coefficient vectors are trimmed and never all-zero.
    terms: Vec<(u32, Vec<i64>)>,
}

impl ChannelPolynomial {
    /// Builds the edge-variable polynomial of one extended-code position:
    /// variables `0..num_edge` are edge positions, the rest are channel slots.
    /// Channel slots contribute a factor eps each (1 when punctured).
    pub fn from_extended(
        poly: &MultilinearPolynomial,
        num_edge: usize,
        punctured: bool,
    ) -> Self {
        let edge_mask_all = (1u32 << num_edge) - 1;
        let mut map: std::collections::BTreeMap<u32, Vec<i64>> = Default::default();
        for &(mask, coeff) in poly.terms() {
            let edge = mask & edge_mask_all;
            let power = if punctured {
                0
            } else {
                (mask & !edge_mask_all).count_ones() as usize
            };
            let entry = map.entry(edge).or_default();
            if entry.len() <= power {
                entry.resize(power + 1, 0);
            }
            entry[power] += coeff;
        }
        let terms = map
            .into_iter()
            .filter_map(|(m, mut v)| {
                while v.last() == Some(&0) {
                    v.pop();
                }
                (!v.is_empty()).then_some((m, v))
            })
            .collect();
        Self { num_edge_vars: num_edge, terms }
    }

    /// A check-node polynomial: no channel slots at all.
    pub fn from_plain(poly: &MultilinearPolynomial) -> Self {
        Self::from_extended(poly, poly.num_vars(), true)
    }

    pub fn num_edge_vars(&self) -> usize {
        self.num_edge_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Substitutes the constant 1 for one edge variable (a removed edge's
    /// message) and re-normalizes, dropping terms that cancel exactly.
    pub fn substitute_one(&self, var: usize) -> Self {
        let bit = 1u32 << var;
        let mut map: std::collections::BTreeMap<u32, Vec<i64>> = Default::default();
        for (mask, coeffs) in &self.terms {
            let entry = map.entry(mask & !bit).or_default();
            if entry.len() < coeffs.len() {
                entry.resize(coeffs.len(), 0);
            }
            for (j, c) in coeffs.iter().enumerate() {
                entry[j] += c;
            }
        }
        let terms = map
            .into_iter()
            .filter_map(|(m, mut v)| {
                while v.last() == Some(&0) {
                    v.pop();
                }
                (!v.is_empty()).then_some((m, v))
            })
            .collect();
        Self { num_edge_vars: self.num_edge_vars, terms }
    }

    /// Least sum degree over edge variables; `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.iter().map(|(m, _)| m.count_ones() as usize).min()
    }

    /// Edge variables appearing as degree-1 monomials (with any nonzero
    /// channel-coefficient polynomial).
    pub fn degree_one_vars(&self) -> Vec<usize> {
        self.terms
            .iter()
            .filter(|(m, _)| m.count_ones() == 1)
            .map(|(m, _)| m.trailing_zeros() as usize)
            .collect()
    }

    /// Iterates term masks (for the sum-of-products decay rule).
    pub fn term_masks(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.iter().map(|&(m, _)| m)
    }

    /// Evaluates at concrete edge values and channel probability.
    pub fn evaluate(&self, edge_vals: &[f64], eps: f64) -> f64 {
        let mut acc = 0.0;
        for (mask, coeffs) in &self.terms {
            let mut coeff = 0.0;
            for &c in coeffs.iter().rev() {
                coeff = coeff * eps + c as f64;
            }
            let mut prod = coeff;
            let mut m = *mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                prod *= edge_vals[i];
                m &= m - 1;
            }
            acc += prod;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{builtin, parse_codeword};

    fn five_two() -> BinaryLinearCode {
        BinaryLinearCode::new(
            5,
            vec![parse_codeword("10101").unwrap(), parse_codeword("01011").unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn h1_of_five_two_code() {
        // h_1 = x3*x5 + x2*x3*x4 - x2*x3*x4*x5 (positions 1-based).
        let h1 = extrinsic_erasure_polynomial(&five_two(), 0);
        let expected = vec![
            (0b01110u32, 1i64),  // x2 x3 x4
            (0b10100, 1),        // x3 x5
            (0b11110, -1),       // x2 x3 x4 x5
        ];
        let mut exp = expected;
        exp.sort_unstable_by_key(|&(m, _)| m);
        assert_eq!(h1.terms(), &exp[..]);
    }

    #[test]
    fn h3_of_five_two_code() {
        // h_3 = x1*x5 + x1*x2*x4 - x1*x2*x4*x5.
        let h3 = extrinsic_erasure_polynomial(&five_two(), 2);
        let mut exp = vec![
            (0b01011u32, 1i64), // x1 x2 x4
            (0b10001, 1),       // x1 x5
            (0b11011, -1),      // x1 x2 x4 x5
        ];
        exp.sort_unstable_by_key(|&(m, _)| m);
        assert_eq!(h3.terms(), &exp[..]);
    }

    #[test]
    fn h1_point_values() {
        let h1 = extrinsic_erasure_polynomial(&five_two(), 0);
        assert_eq!(h1.evaluate(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(h1.evaluate(&[1.0; 5]).unwrap(), 1.0);
        let half = h1.evaluate(&[0.0, 0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!((half - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn spc_polynomial_is_expanded_union() {
        // 1 - prod_{j != pos} (1 - x_j): coefficient (-1)^(|S|+1) on each
        // nonempty subset S of the other positions.
        let spc = builtin("spc4").unwrap();
        let h = extrinsic_erasure_polynomial(&spc, 0);
        let others = [1usize, 2, 3];
        let mut exp = Vec::new();
        for sel in 1u32..8 {
            let mut mask = 0u32;
            for (i, &v) in others.iter().enumerate() {
                if sel >> i & 1 == 1 {
                    mask |= 1 << v;
                }
            }
            let sign = if sel.count_ones() % 2 == 1 { 1 } else { -1 };
            exp.push((mask, sign));
        }
        exp.sort_unstable_by_key(|&(m, _)| m);
        assert_eq!(h.terms(), &exp[..]);
    }

    #[test]
    fn repetition_polynomial_is_full_product() {
        let h = extrinsic_erasure_polynomial(&builtin("rep4").unwrap(), 1);
        assert_eq!(h.terms(), &[(0b1101, 1)]);
    }

    #[test]
    fn degree_profile_of_five_two() {
        let prof = min_degree_profile(&five_two());
        // Position 1: min degree 2 via x3*x5.
        assert_eq!(prof.positions[0].min_degree, Some(2));
        assert!(prof.positions[0].degree_one.is_empty());
        // Every position of a min-distance-3 code has min degree >= 2.
        for p in &prof.positions {
            assert!(p.min_degree.unwrap() >= 2);
        }
    }

    #[test]
    fn degree_profile_of_spc() {
        let prof = min_degree_profile(&builtin("spc5").unwrap());
        for (pos, p) in prof.positions.iter().enumerate() {
            assert_eq!(p.min_degree, Some(1));
            let vars: Vec<usize> = p.degree_one.iter().map(|&(v, _)| v).collect();
            let expect: Vec<usize> = (0..5).filter(|&v| v != pos).collect();
            assert_eq!(vars, expect);
            assert!(p.degree_one.iter().all(|&(_, c)| c == 1));
        }
    }

    #[test]
    fn variable_profile_of_repetition() {
        // Extended repetition of length d: edge-degree d-1 at edge positions
        // for d >= 2; degree 0 at d = 1 (the channel factor alone remains).
        for d in 1..=4usize {
            let ext = builtin(&format!("rep{d}")).unwrap().extend_for_variable().unwrap();
            let h = extrinsic_erasure_polynomial(&ext, 0);
            let cp = ChannelPolynomial::from_extended(&h, d, false);
            assert_eq!(cp.min_degree(), Some(d - 1));
        }
    }

    #[test]
    fn punctured_repetition_keeps_edge_degree() {
        let ext = builtin("rep2").unwrap().extend_for_variable().unwrap();
        let h = extrinsic_erasure_polynomial(&ext, 0);
        let cp = ChannelPolynomial::from_extended(&h, 2, true);
        // h = x_other * channel; punctured channel = 1 leaves the bare edge term.
        assert_eq!(cp.min_degree(), Some(1));
        assert_eq!(cp.degree_one_vars(), vec![1]);
    }

    #[test]
    fn substitute_one_cancels_exactly() {
        // SPC position 0 over x1,x2: h = x1 + x2 - x1 x2; substituting x1 := 1
        // gives the constant 1 (degree 0), the stuck-at-erasure signal.
        let spc = builtin("spc3").unwrap();
        let h = extrinsic_erasure_polynomial(&spc, 0);
        let cp = ChannelPolynomial::from_plain(&h);
        let sub = cp.substitute_one(1);
        assert_eq!(sub.min_degree(), Some(0));
        // And the remaining variable's monomial cancelled: 1 + x2 - x2 = 1.
        assert_eq!(sub.degree_one_vars(), Vec::<usize>::new());
    }

    #[test]
    fn degree_one_drops_on_cancellation() {
        // p = x0 + x0*x1 with coefficient -1: substituting x1 := 1 cancels x0.
        let p = MultilinearPolynomial::from_terms(2, vec![(0b01, 1), (0b11, -1)]);
        let cp = ChannelPolynomial::from_plain(&p);
        assert_eq!(cp.degree_one_vars(), vec![0]);
        let sub = cp.substitute_one(1);
        assert!(sub.is_zero());
        assert_eq!(sub.min_degree(), None);
    }

    #[test]
    fn evaluate_rejects_out_of_range() {
        let p = MultilinearPolynomial::from_terms(1, vec![(0, 2)]);
        assert!(p.evaluate(&[0.0]).is_err());
    }

    #[test]
    fn min_degree_respects_min_distance() {
        for (_, c) in crate::code::builtin_catalog(8) {
            let d = c.min_distance();
            for p in min_degree_profile(&c).positions {
                assert!(p.min_degree.unwrap_or(usize::MAX) >= d.saturating_sub(1));
            }
        }
    }
}
