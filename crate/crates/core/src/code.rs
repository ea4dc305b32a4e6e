//! Small binary linear component codes.
//!
//! Codes are kept deliberately tiny (n <= 16, k <= 12) so that codeword
//! enumeration and erasure-pattern expansion stay exact and fast. Codewords
//! are bitmasks with bit `i` holding position `i` (position 0 is the leftmost
//! character of the string form).

use crate::error::{Error, Result};

/// Hard cap on code length; keeps 2^(n-1) pattern expansion tractable.
pub const MAX_N: usize = 16;
/// Hard cap on code dimension; keeps 2^k codeword enumeration tractable.
pub const MAX_K: usize = 12;

/// A binary linear code given by k independent generator rows of length n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryLinearCode {
    n: usize,
    k: usize,
    generators: Vec<u32>,
}

impl BinaryLinearCode {
    /// Builds a code from generator rows; rows must be linearly independent.
    pub fn new(n: usize, generators: Vec<u32>) -> Result<Self> {
        let k = generators.len();
        if n == 0 || n > MAX_N {
            return Err(Error::SizeCap(format!("code length {n} outside 1..={MAX_N}")));
        }
        if k == 0 || k > MAX_K {
            return Err(Error::SizeCap(format!("code dimension {k} outside 1..={MAX_K}")));
        }
        if k > n {
            return Err(Error::Invalid(format!("dimension {k} exceeds length {n}")));
        }
        let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        if generators.iter().any(|g| g & !mask != 0) {
            return Err(Error::Invalid("generator row wider than code length".into()));
        }
        if gf2_rank(&generators) != k {
            return Err(Error::Invalid("generator rows are linearly dependent".into()));
        }
        Ok(Self { n, k, generators })
    }

    /// Builds a code from an explicit codeword list (must be a full row space
    /// of some basis, i.e. closed under addition and containing zero).
    pub fn from_codewords(n: usize, codewords: &[u32]) -> Result<Self> {
        let mut basis: Vec<u32> = Vec::new();
        for &cw in codewords {
            let mut v = cw;
            for &b in &basis {
                v = v.min(v ^ b);
            }
            if v != 0 {
                basis.push(v);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        let code = Self::new(n, basis)?;
        let mut expect = code.enumerate_codewords();
        let mut got: Vec<u32> = codewords.to_vec();
        expect.sort_unstable();
        got.sort_unstable();
        got.dedup();
        if expect != got {
            return Err(Error::Invalid(
                "codeword list is not a linear code (not closed under addition)".into(),
            ));
        }
        Ok(code)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// All 2^k codewords, sorted lexicographically as binary strings.
    pub fn enumerate_codewords(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(1 << self.k);
        for sel in 0u32..(1 << self.k) {
            let mut cw = 0u32;
            for (i, &g) in self.generators.iter().enumerate() {
                if sel >> i & 1 == 1 {
                    cw ^= g;
                }
            }
            out.push(cw);
        }
        out.sort_unstable_by(|&a, &b| lex_cmp(a, b, self.n));
        out
    }

    /// Minimum Hamming weight over nonzero codewords.
    pub fn min_distance(&self) -> usize {
        self.enumerate_codewords()
            .iter()
            .filter(|&&cw| cw != 0)
            .map(|cw| cw.count_ones() as usize)
            .min()
            .expect("k >= 1 guarantees a nonzero codeword")
    }

    /// Extended code [G | I_k] used at variable nodes: the first n positions
    /// stay edge positions, the appended k positions are channel slots.
    pub fn extend_for_variable(&self) -> Result<Self> {
        let n = self.n + self.k;
        if n > MAX_N {
            return Err(Error::SizeCap(format!(
                "extended length {n} exceeds {MAX_N}"
            )));
        }
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, &g)| g | 1 << (self.n + i))
            .collect();
        Self::new(n, generators)
    }

    /// Renders one codeword of this code as a binary string.
    pub fn codeword_string(&self, cw: u32) -> String {
        (0..self.n)
            .map(|i| if cw >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Compares two codewords as binary strings (position 0 first).
fn lex_cmp(a: u32, b: u32, n: usize) -> std::cmp::Ordering {
    for i in 0..n {
        let (x, y) = (a >> i & 1, b >> i & 1);
        if x != y {
            return x.cmp(&y);
        }
    }
    std::cmp::Ordering::Equal
}

fn gf2_rank(rows: &[u32]) -> usize {
    let mut basis: Vec<u32> = Vec::new();
    let mut rank = 0;
    for &row in rows {
        let mut v = row;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            rank += 1;
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    rank
}

/// Parses a binary string ("10101") into a codeword mask.
pub fn parse_codeword(s: &str) -> Result<u32> {
    if s.len() > MAX_N || s.is_empty() {
        return Err(Error::Invalid(format!("codeword '{s}' has bad length")));
    }
    let mut cw = 0u32;
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '1' => cw |= 1 << i,
            '0' => {}
            _ => return Err(Error::Invalid(format!("codeword '{s}' has non-binary digit"))),
        }
    }
    Ok(cw)
}

/// Resolves a built-in code name: `rep<d>`, `spc<d>`, `hamming74`,
/// `dual_hamming74`. Returns None for unknown names.
pub fn builtin(name: &str) -> Option<BinaryLinearCode> {
    if let Some(d) = name.strip_prefix("rep").and_then(|s| s.parse::<usize>().ok()) {
        if (1..=MAX_N).contains(&d) {
            return BinaryLinearCode::new(d, vec![(1u32 << d) - 1]).ok();
        }
        return None;
    }
    if let Some(d) = name.strip_prefix("spc").and_then(|s| s.parse::<usize>().ok()) {
        if (2..=MAX_N).contains(&d) && d - 1 <= MAX_K {
            let gens = (0..d - 1).map(|i| 1 << i | 1 << (d - 1)).collect();
            return BinaryLinearCode::new(d, gens).ok();
        }
        return None;
    }
    match name {
        // Systematic (7,4) Hamming, G = [I4 | P].
        "hamming74" => {
            let p = [0b110u32, 0b101, 0b011, 0b111];
            let gens = (0..4).map(|i| 1 << i | p[i] << 4).collect();
            BinaryLinearCode::new(7, gens).ok()
        }
        // Its dual, the (7,3) simplex code, G = [P^T | I3].
        "dual_hamming74" => {
            let pt = [0b1101u32, 0b1011, 0b0111];
            let gens = (0..3).map(|i| pt[i] | 1 << (4 + i)).collect();
            BinaryLinearCode::new(7, gens).ok()
        }
        _ => None,
    }
}

/// All built-in codes used by exhaustive oracle tests, with their names.
pub fn builtin_catalog(max_len: usize) -> Vec<(String, BinaryLinearCode)> {
    let mut out = Vec::new();
    for d in 1..=MAX_N {
        out.push((format!("rep{d}"), builtin(&format!("rep{d}")).unwrap()));
    }
    for d in 2..=(MAX_K + 1).min(MAX_N) {
        out.push((format!("spc{d}"), builtin(&format!("spc{d}")).unwrap()));
    }
    out.push(("hamming74".into(), builtin("hamming74").unwrap()));
    out.push(("dual_hamming74".into(), builtin("dual_hamming74").unwrap()));
    out.retain(|(_, c)| c.len() <= max_len);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(c: &BinaryLinearCode) -> Vec<String> {
        c.enumerate_codewords()
            .iter()
            .map(|&cw| c.codeword_string(cw))
            .collect()
    }

    #[test]
    fn five_two_codewords() {
        let c = BinaryLinearCode::new(
            5,
            vec![parse_codeword("10101").unwrap(), parse_codeword("01011").unwrap()],
        )
        .unwrap();
        assert_eq!(strings(&c), vec!["00000", "01011", "10101", "11110"]);
    }

    #[test]
    fn repetition_and_spc_codewords() {
        assert_eq!(strings(&builtin("rep3").unwrap()), vec!["000", "111"]);
        assert_eq!(
            strings(&builtin("spc3").unwrap()),
            vec!["000", "011", "101", "110"]
        );
    }

    #[test]
    fn min_distances() {
        let c = BinaryLinearCode::new(
            5,
            vec![parse_codeword("10101").unwrap(), parse_codeword("01011").unwrap()],
        )
        .unwrap();
        assert_eq!(c.min_distance(), 3);
        assert_eq!(builtin("rep5").unwrap().min_distance(), 5);
        assert_eq!(builtin("spc6").unwrap().min_distance(), 2);
        assert_eq!(builtin("hamming74").unwrap().min_distance(), 3);
        assert_eq!(builtin("dual_hamming74").unwrap().min_distance(), 4);
    }

    #[test]
    fn extend_five_two() {
        let c = BinaryLinearCode::new(
            5,
            vec![parse_codeword("10101").unwrap(), parse_codeword("01011").unwrap()],
        )
        .unwrap();
        let e = c.extend_for_variable().unwrap();
        assert_eq!((e.len(), e.dimension()), (7, 2));
        assert_eq!(strings(&e), vec!["0000000", "0101101", "1010110", "1111011"]);
    }

    #[test]
    fn extend_repetition_is_longer_repetition() {
        let e = builtin("rep3").unwrap().extend_for_variable().unwrap();
        assert_eq!(strings(&e), strings(&builtin("rep4").unwrap()));
    }

    #[test]
    fn extend_identity_generator_doubles_each_bit() {
        let c = BinaryLinearCode::new(3, vec![0b001, 0b010, 0b100]).unwrap();
        let e = c.extend_for_variable().unwrap();
        // Position i and position 3+i always carry the same bit.
        for cw in e.enumerate_codewords() {
            for i in 0..3 {
                assert_eq!(cw >> i & 1, cw >> (3 + i) & 1);
            }
        }
    }

    #[test]
    fn from_codewords_roundtrip() {
        let cws = [0b00000u32, 0b11010, 0b10101, 0b01111];
        let c = BinaryLinearCode::from_codewords(5, &cws).unwrap();
        assert_eq!(c.dimension(), 2);
        let mut expect = cws.to_vec();
        expect.sort_unstable();
        let mut got = c.enumerate_codewords();
        got.sort_unstable();
        assert_eq!(got, expect);
    }

    #[test]
    fn from_codewords_rejects_nonlinear_sets() {
        assert!(BinaryLinearCode::from_codewords(3, &[0b000, 0b011, 0b101]).is_err());
    }

    #[test]
    fn dependent_generators_rejected() {
        assert!(BinaryLinearCode::new(4, vec![0b0011, 0b0110, 0b0101]).is_err());
    }
}
