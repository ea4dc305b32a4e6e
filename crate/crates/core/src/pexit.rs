//! Per-socket EXIT analysis over the binary-input AWGN channel under the
//! Gaussian message approximation, and the Eb/N0 threshold search.
//!
//! The public J function integrates the mutual information of a symmetric
//! Gaussian LLR by adaptive quadrature (absolute error <= 1e-9). The
//! iteration itself runs on a precomputed monotone-cubic table of J and its
//! inverse, accurate to ~1e-7, built once per process.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::protograph::Protograph;

/// Convergence target for a-posteriori mutual information.
pub const APP_TARGET: f64 = 1.0 - 1e-6;
/// Default iteration cap for one operating point.
pub const DEFAULT_PEXIT_MAX_ITER: u32 = 10_000;
/// Iterations without measurable progress before declaring divergence.
pub const STALL_WINDOW: u32 = 50;
/// Minimum a-posteriori improvement that counts as progress.
pub const STALL_IMPROVEMENT: f64 = 1e-12;
/// Default Eb/N0 search bracket in dB.
pub const DEFAULT_BRACKET_DB: (f64, f64) = (-1.59, 10.0);

/// log2(1 + e^{-u}), stable for large |u|.
fn softplus_log2(u: f64) -> f64 {
    if u >= 0.0 {
        (-u).exp().ln_1p() / LN_2
    } else {
        (-u + u.exp().ln_1p()) / LN_2
    }
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Mutual information of a symmetric Gaussian LLR with mean sigma^2/2 and
/// variance sigma^2, by quadrature. Absolute error <= 1e-9.
pub fn j_function(sigma: f64) -> f64 {
    assert!(sigma >= 0.0, "j_function requires sigma >= 0");
    if sigma == 0.0 {
        return 0.0;
    }
    let norm = 1.0 / (2.0 * PI).sqrt();
    let f = move |z: f64| {
        norm * (-0.5 * z * z).exp() * softplus_log2(0.5 * sigma * sigma + sigma * z)
    };
    let (a, b) = (-12.0, 12.0);
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let loss = adaptive_simpson(&f, a, b, fa, fm, fb, whole, 1e-10, 48);
    (1.0 - loss).clamp(0.0, 1.0)
}

/// Inverse of `j_function` by bisection on sigma in [0, 50].
pub fn j_inverse(y: f64) -> f64 {
    assert!((0.0..=1.0).contains(&y), "j_inverse requires y in [0,1]");
    if y <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 50.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if j_function(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Monotone cubic (Fritsch-Carlson) interpolation table of J on a uniform
/// grid. J saturates to 1.0 in double precision around sigma = 18, well
/// inside the tabulated range.
struct JTable {
    values: Vec<f64>,
    tangents: Vec<f64>,
}

const TABLE_STEP: f64 = 1.0 / 512.0;
const TABLE_SIGMA_MAX: f64 = 24.0;

impl JTable {
    fn build() -> Self {
        let n = (TABLE_SIGMA_MAX / TABLE_STEP).round() as usize + 1;
        let values: Vec<f64> = (0..n).map(|i| j_function(i as f64 * TABLE_STEP)).collect();
        let secants: Vec<f64> =
            (0..n - 1).map(|i| (values[i + 1] - values[i]) / TABLE_STEP).collect();
        let mut tangents = vec![0.0; n];
        tangents[0] = secants[0];
        tangents[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            if secants[i - 1] * secants[i] > 0.0 {
                tangents[i] = 0.5 * (secants[i - 1] + secants[i]);
            }
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                tangents[i] = 0.0;
                tangents[i + 1] = 0.0;
                continue;
            }
            let alpha = tangents[i] / secants[i];
            let beta = tangents[i + 1] / secants[i];
            let s = alpha * alpha + beta * beta;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                tangents[i] = tau * alpha * secants[i];
                tangents[i + 1] = tau * beta * secants[i];
            }
        }
        Self { values, tangents }
    }

    fn eval(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        if sigma >= TABLE_SIGMA_MAX {
            return 1.0;
        }
        let pos = sigma / TABLE_STEP;
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.tangents[k] * TABLE_STEP, self.tangents[k + 1] * TABLE_STEP);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }

    fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            let k = self.values.partition_point(|&v| v < 1.0);
            return (k.min(self.values.len() - 1)) as f64 * TABLE_STEP;
        }
        let k = self.values.partition_point(|&v| v < y);
        if k == 0 {
            return 0.0;
        }
        let (mut lo, mut hi) = ((k - 1) as f64 * TABLE_STEP, k as f64 * TABLE_STEP);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn jt() -> &'static JTable {
    static TABLE: OnceLock<JTable> = OnceLock::new();
    TABLE.get_or_init(JTable::build)
}

/// Per-socket mutual informations of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PexitState {
    /// Variable-to-check extrinsic MI per socket.
    pub iev: Vec<f64>,
    /// Check-to-variable extrinsic MI per socket.
    pub iec: Vec<f64>,
    pub iteration: u32,
    pub eb_n0_db: f64,
}

/// Result of running the iteration at one operating point.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PexitOutcome {
    pub converged: bool,
    pub iterations_used: u32,
    /// Worst a-posteriori variable MI at the end.
    pub min_app: f64,
}

/// Bisection result in dB.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThresholdDb {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Prepared iteration for one protograph at one Eb/N0 point.
pub struct PexitSystem<'a> {
    p: &'a Protograph,
    /// Channel LLR standard deviation per variable; 0 for punctured.
    sigma_ch: Vec<f64>,
    eb_n0_db: f64,
}

impl<'a> PexitSystem<'a> {
    pub fn new(p: &'a Protograph, eb_n0_db: f64) -> Result<Self> {
        if !p.is_standard() {
            return Err(Error::Unsupported(
                "EXIT analysis supports repetition/SPC nodes only".into(),
            ));
        }
        let rate = p.design_rate()?;
        let r_t = *rate.transmitted.numer() as f64 / *rate.transmitted.denom() as f64;
        let sigma_sq = 8.0 * r_t * 10f64.powf(eb_n0_db / 10.0);
        let sigma_ch = (0..p.num_vars())
            .map(|j| if p.is_punctured(j) { 0.0 } else { sigma_sq.sqrt() })
            .collect();
        Ok(Self { p, sigma_ch, eb_n0_db })
    }

    pub fn init(&self) -> PexitState {
        let n = self.p.sockets().len();
        let mut iev = vec![0.0; n];
        for j in 0..self.p.num_vars() {
            let i0 = jt().eval(self.sigma_ch[j]);
            for &e in self.p.var_sockets(j) {
                iev[e] = i0;
            }
        }
        PexitState { iev, iec: vec![0.0; n], iteration: 0, eb_n0_db: self.eb_n0_db }
    }

    pub fn step(&self, state: &PexitState) -> PexitState {
        let n = state.iev.len();
        let mut next = PexitState {
            iev: vec![0.0; n],
            iec: vec![0.0; n],
            iteration: state.iteration + 1,
            eb_n0_db: state.eb_n0_db,
        };
        for i in 0..self.p.num_checks() {
            let sockets = self.p.check_sockets(i);
            let terms: Vec<f64> = sockets
                .iter()
                .map(|&e| {
                    let s = jt().inverse(1.0 - state.iev[e]);
                    s * s
                })
                .collect();
            let total: f64 = terms.iter().sum();
            for (idx, &e) in sockets.iter().enumerate() {
                let rest = (total - terms[idx]).max(0.0);
                next.iec[e] = 1.0 - jt().eval(rest.sqrt());
            }
        }
        for j in 0..self.p.num_vars() {
            let sockets = self.p.var_sockets(j);
            let terms: Vec<f64> = sockets
                .iter()
                .map(|&e| {
                    let s = jt().inverse(next.iec[e]);
                    s * s
                })
                .collect();
            let ch = self.sigma_ch[j] * self.sigma_ch[j];
            let total: f64 = terms.iter().sum::<f64>() + ch;
            for (idx, &e) in sockets.iter().enumerate() {
                let rest = (total - terms[idx]).max(0.0);
                next.iev[e] = jt().eval(rest.sqrt());
            }
        }
        next
    }

    /// A-posteriori mutual information per variable for a state whose iec
    /// is current.
    pub fn app(&self, state: &PexitState) -> Vec<f64> {
        (0..self.p.num_vars())
            .map(|j| {
                let sum: f64 = self
                    .p
                    .var_sockets(j)
                    .iter()
                    .map(|&e| {
                        let s = jt().inverse(state.iec[e]);
                        s * s
                    })
                    .sum();
                let ch = self.sigma_ch[j] * self.sigma_ch[j];
                jt().eval((sum + ch).sqrt())
            })
            .collect()
    }

    fn min_app(&self, state: &PexitState) -> f64 {
        self.app(state).into_iter().fold(1.0, f64::min)
    }

    pub fn run(&self, max_iter: u32) -> PexitOutcome {
        assert!(max_iter >= 1);
        let mut state = self.init();
        let mut best = f64::NEG_INFINITY;
        let mut since_progress = 0u32;
        let mut iterations = 1u32;
        loop {
            let m = self.min_app(&state);
            if m > APP_TARGET {
                return PexitOutcome { converged: true, iterations_used: iterations, min_app: m };
            }
            if m > best + STALL_IMPROVEMENT {
                best = m;
                since_progress = 0;
            } else {
                since_progress += 1;
            }
            if iterations >= max_iter || since_progress >= STALL_WINDOW {
                return PexitOutcome { converged: false, iterations_used: iterations, min_app: m };
            }
            state = self.step(&state);
            iterations += 1;
        }
    }
}

/// Runs the iteration at a fixed Eb/N0; converged when every a-posteriori
/// variable MI exceeds the target.
pub fn pexit_run(p: &Protograph, eb_n0_db: f64, max_iter: u32) -> Result<PexitOutcome> {
    Ok(PexitSystem::new(p, eb_n0_db)?.run(max_iter))
}

/// Eb/N0 threshold in dB by bisection. Errors when the default bracket does
/// not straddle the threshold.
pub fn awgn_threshold(p: &Protograph, precision_db: f64) -> Result<ThresholdDb> {
    if precision_db <= 0.0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    let (mut lo, mut hi) = DEFAULT_BRACKET_DB;
    let probe = |db: f64| -> Result<bool> {
        Ok(PexitSystem::new(p, db)?.run(DEFAULT_PEXIT_MAX_ITER).converged)
    };
    if probe(lo)? {
        return Err(Error::Search(format!(
            "lower bracket {lo} dB already converges; widen the bracket"
        )));
    }
    if !probe(hi)? {
        return Err(Error::Search(format!(
            "upper bracket {hi} dB does not converge; widen the bracket"
        )));
    }
    while hi - lo > precision_db {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdDb { value: 0.5 * (lo + hi), lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::parse_protograph;

    #[test]
    fn j_endpoints() {
        assert_eq!(j_function(0.0), 0.0);
        assert!(j_function(30.0) > 1.0 - 1e-9);
    }

    #[test]
    fn j_inverse_roundtrip() {
        for y in [0.05, 0.3, 0.5, 0.7, 0.95] {
            let s = j_inverse(y);
            assert!((j_function(s) - y).abs() < 1e-8, "y={y}");
        }
    }

    #[test]
    fn j_strictly_increasing() {
        let mut prev = 0.0;
        for i in 1..=120 {
            let v = j_function(i as f64 * 0.1);
            assert!(v > prev, "sigma={}", i as f64 * 0.1);
            prev = v;
        }
    }

    #[test]
    fn table_matches_quadrature() {
        for i in 0..=60 {
            let sigma = i as f64 * 0.17;
            let exact = j_function(sigma);
            assert!((jt().eval(sigma) - exact).abs() <= 1e-7, "sigma={sigma}");
        }
    }

    #[test]
    fn table_inverse_roundtrip() {
        for y in [1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 0.999999] {
            let s = jt().inverse(y);
            assert!((jt().eval(s) - y).abs() < 1e-9, "y={y}");
        }
    }

    #[test]
    fn converges_far_above_threshold() {
        let p = parse_protograph("3 6\n1 1 1 1 1 1\n1 1 1 1 1 1\n1 1 1 1 1 1\n").unwrap();
        let out = pexit_run(&p, 10.0, 2000).unwrap();
        assert!(out.converged);
    }

    #[test]
    fn three_six_regular_threshold_band() {
        let p = parse_protograph("3 6\n1 1 1 1 1 1\n1 1 1 1 1 1\n1 1 1 1 1 1\n").unwrap();
        let t = awgn_threshold(&p, 0.01).unwrap();
        assert!((1.0..1.25).contains(&t.value), "got {}", t.value);
    }

    #[test]
    fn monotone_in_operating_point() {
        let p = parse_protograph("2 4\n1 1 1 1\n1 1 1 1\n").unwrap();
        let t = awgn_threshold(&p, 0.02).unwrap();
        assert!(!pexit_run(&p, t.value - 0.2, 2000).unwrap().converged);
        assert!(pexit_run(&p, t.value + 0.2, 2000).unwrap().converged);
        assert!(pexit_run(&p, t.value + 3.0, 2000).unwrap().converged);
    }

    #[test]
    fn unpuncturing_never_raises_threshold() {
        let punctured = parse_protograph("2 4\n1 1 1 1\n1 1 1 1\npunctured 1\n").unwrap();
        let plain = parse_protograph("2 4\n1 1 1 1\n1 1 1 1\n").unwrap();
        let tp = awgn_threshold(&punctured, 0.02).unwrap();
        let tu = awgn_threshold(&plain, 0.02).unwrap();
        assert!(tu.value <= tp.value + 0.04);
    }

    #[test]
    fn generalized_nodes_rejected() {
        let text = "3 1\n1\n1\n1\ncode full3 3 3 100 010 001\nvnode 1 code full3\n";
        let p = parse_protograph(text).unwrap();
        assert!(matches!(pexit_run(&p, 1.0, 10), Err(Error::Unsupported(_))));
    }
}
