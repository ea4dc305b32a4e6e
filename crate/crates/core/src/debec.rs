//! Per-socket density evolution over the binary erasure channel and the
//! bit-error threshold search.
//!
//! One iteration maps check-to-variable erasure probabilities y from the
//! previous variable-to-check probabilities x, then x from the fresh y and
//! the channel. Standard nodes use the closed repetition/SPC forms; nodes
//! with component codes evaluate their extrinsic MAP erasure polynomials.

use crate::code::BinaryLinearCode;
use crate::error::{Error, Result};
use crate::poly::{extrinsic_erasure_polynomial, MultilinearPolynomial};
use crate::protograph::Protograph;

/// Default convergence target for max-x.
pub const DEFAULT_DELTA: f64 = 1e-10;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: u32 = 4000;
/// Window length for stall detection.
pub const STALL_WINDOW: u32 = 200;
/// A run is declared non-converging when max-x fails to shrink by at least
/// this factor across a full stall window.
pub const STALL_FACTOR: f64 = 1.0 - 1e-6;
/// Smallest allowed bisection bracket width.
pub const MIN_PRECISION: f64 = 1e-5;

/// Per-socket erasure probabilities of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeErasureState {
    /// Variable-to-check erasure probability per socket.
    pub x: Vec<f64>,
    /// Check-to-variable erasure probability per socket.
    pub y: Vec<f64>,
    pub iteration: u32,
    pub epsilon: f64,
}

impl EdgeErasureState {
    pub fn max_x(&self) -> f64 {
        self.x.iter().copied().fold(0.0, f64::max)
    }
}

/// Result of running density evolution at one channel parameter.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DEOutcome {
    pub converged: bool,
    /// States evaluated, counting the initialization as iteration 1.
    pub iterations_used: u32,
    pub final_max_x: f64,
    /// Per-iteration max-x record, when requested.
    pub trajectory: Option<Vec<f64>>,
}

/// Bisection result: the bracket midpoint and the bracket itself.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThresholdResult {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

enum VarKernel {
    /// x_m = ch * prod_{m' != m} y_{m'}.
    Repetition,
    /// Extrinsic polynomials of the extended code [G | I_k], one per socket,
    /// over n edge positions then k channel slots.
    General { polys: Vec<MultilinearPolynomial>, num_edge: usize, num_channel: usize },
}

enum CheckKernel {
    /// y_n = 1 - prod_{n' != n} (1 - x_{n'}).
    Spc,
    General { polys: Vec<MultilinearPolynomial>, num_edge: usize },
}

/// Prepared evaluation kernels for one protograph. Construction is pure;
/// the system is immutable and safe to share across threads.
pub struct DeSystem<'a> {
    p: &'a Protograph,
    var_kernels: Vec<VarKernel>,
    check_kernels: Vec<CheckKernel>,
}

impl<'a> DeSystem<'a> {
    /// Standard nodes run on closed forms; generalized nodes on polynomials.
    pub fn new(p: &'a Protograph) -> Result<Self> {
        Self::build(p, false)
    }

    /// Forces the polynomial path for every node (repetition/SPC codes are
    /// materialized). Only feasible for small degrees; used to cross-check
    /// the closed forms.
    pub fn with_polynomial_kernels(p: &'a Protograph) -> Result<Self> {
        Self::build(p, true)
    }

    fn build(p: &'a Protograph, force_poly: bool) -> Result<Self> {
        let report = p.validate();
        if !report.ok {
            return Err(Error::Invalid("density evolution requires a valid protograph".into()));
        }
        let mut var_kernels = Vec::with_capacity(p.num_vars());
        for j in 0..p.num_vars() {
            let deg = p.var_degree(j);
            let kernel = match p.var_code(j) {
                None if !force_poly => VarKernel::Repetition,
                None if deg == 0 => VarKernel::Repetition,
                assignment => {
                    let base = match assignment {
                        Some(a) => a.code.clone(),
                        None => BinaryLinearCode::new(deg, vec![(1u32 << deg) - 1])?,
                    };
                    let ext = base.extend_for_variable()?;
                    let polys = (0..deg)
                        .map(|s| {
                            let pos = assignment.map_or(s, |a| a.position_of_socket(s));
                            extrinsic_erasure_polynomial(&ext, pos)
                        })
                        .collect();
                    VarKernel::General {
                        polys,
                        num_edge: base.len(),
                        num_channel: base.dimension(),
                    }
                }
            };
            var_kernels.push(kernel);
        }
        let mut check_kernels = Vec::with_capacity(p.num_checks());
        for i in 0..p.num_checks() {
            let deg = p.check_degree(i);
            let kernel = match p.check_code(i) {
                None if !force_poly => CheckKernel::Spc,
                None if deg == 0 => CheckKernel::Spc,
                assignment => {
                    let code = match assignment {
                        Some(a) => a.code.clone(),
                        None => {
                            // SPC of this degree: G = [I_{d-1} | 1].
                            if deg == 1 {
                                // A single-socket parity check forces its bit
                                // to zero: the extrinsic output is never
                                // erased. Encode as the zero polynomial.
                                check_kernels.push(CheckKernel::General {
                                    polys: vec![MultilinearPolynomial::from_terms(1, vec![])],
                                    num_edge: 1,
                                });
                                continue;
                            }
                            let gens =
                                (0..deg - 1).map(|b| 1 << b | 1 << (deg - 1)).collect();
                            BinaryLinearCode::new(deg, gens)?
                        }
                    };
                    let polys = (0..deg)
                        .map(|s| {
                            let pos = assignment.map_or(s, |a| a.position_of_socket(s));
                            extrinsic_erasure_polynomial(&code, pos)
                        })
                        .collect();
                    CheckKernel::General { polys, num_edge: code.len() }
                }
            };
            check_kernels.push(kernel);
        }
        Ok(Self { p, var_kernels, check_kernels })
    }

    pub fn protograph(&self) -> &Protograph {
        self.p
    }

    fn channel(&self, j: usize, eps: f64) -> f64 {
        if self.p.is_punctured(j) {
            1.0
        } else {
            eps
        }
    }

    /// Initial state: y = 1 everywhere, x from the variable rules at y = 1.
    pub fn init(&self, eps: f64) -> Result<EdgeErasureState> {
        let n = self.p.sockets().len();
        let mut state = EdgeErasureState {
            x: vec![0.0; n],
            y: vec![1.0; n],
            iteration: 0,
            epsilon: eps,
        };
        self.update_x(&mut state)?;
        Ok(state)
    }

    /// One full iteration: fresh y from the previous x, then fresh x.
    pub fn step(&self, state: &EdgeErasureState) -> Result<EdgeErasureState> {
        let mut next = EdgeErasureState {
            x: state.x.clone(),
            y: vec![0.0; state.y.len()],
            iteration: state.iteration + 1,
            epsilon: state.epsilon,
        };
        self.update_y(state, &mut next)?;
        self.update_x(&mut next)?;
        Ok(next)
    }

    fn update_y(&self, prev: &EdgeErasureState, next: &mut EdgeErasureState) -> Result<()> {
        // Parity extrinsic erasure: y = 1 - prod(1 - x_sibling).
        let known: Vec<f64> = prev.x.iter().map(|&v| 1.0 - v).collect();
        for i in 0..self.p.num_checks() {
            let sockets = self.p.check_sockets(i);
            match &self.check_kernels[i] {
                CheckKernel::Spc => {
                    leave_one_out(sockets, &known, &mut next.y, |prod_others| {
                        1.0 - prod_others
                    });
                }
                CheckKernel::General { polys, num_edge } => {
                    let mut vals = vec![0.0; *num_edge];
                    let assignment = self.p.check_code(i);
                    for (s, &sock) in sockets.iter().enumerate() {
                        let pos = assignment.map_or(s, |a| a.position_of_socket(s));
                        vals[pos] = prev.x[sock];
                    }
                    for (s, &sock) in sockets.iter().enumerate() {
                        next.y[sock] = polys[s].evaluate(&vals)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn update_x(&self, state: &mut EdgeErasureState) -> Result<()> {
        let eps = state.epsilon;
        for j in 0..self.p.num_vars() {
            let sockets = self.p.var_sockets(j);
            let ch = self.channel(j, eps);
            match &self.var_kernels[j] {
                VarKernel::Repetition => {
                    let y = std::mem::take(&mut state.y);
                    leave_one_out(sockets, &y, &mut state.x, |prod_others| ch * prod_others);
                    state.y = y;
                }
                VarKernel::General { polys, num_edge, num_channel } => {
                    let mut vals = vec![ch; num_edge + num_channel];
                    let assignment = self.p.var_code(j);
                    for (s, &sock) in sockets.iter().enumerate() {
                        let pos = assignment.map_or(s, |a| a.position_of_socket(s));
                        vals[pos] = state.y[sock];
                    }
                    for (s, &sock) in sockets.iter().enumerate() {
                        state.x[sock] = polys[s].evaluate(&vals)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs to convergence (max-x below `delta`), iteration cap, stall, or
    /// exact fixpoint.
    pub fn run(
        &self,
        eps: f64,
        max_iter: u32,
        delta: f64,
        record_trajectory: bool,
    ) -> Result<DEOutcome> {
        assert!(max_iter >= 1, "max_iter must be at least 1");
        assert!((0.0..1.0).contains(&delta), "delta must lie in (0,1)");
        let mut state = self.init(eps)?;
        let mut trajectory = record_trajectory.then(Vec::new);
        let mut window = vec![f64::INFINITY; STALL_WINDOW as usize];
        let mut iterations = 1u32;
        loop {
            let m = state.max_x();
            if let Some(t) = trajectory.as_mut() {
                t.push(m);
            }
            if m < delta {
                return Ok(DEOutcome {
                    converged: true,
                    iterations_used: iterations,
                    final_max_x: m,
                    trajectory,
                });
            }
            let slot = (iterations % STALL_WINDOW) as usize;
            let stalled = m > STALL_FACTOR * window[slot];
            window[slot] = m;
            if iterations >= max_iter || stalled {
                return Ok(DEOutcome {
                    converged: false,
                    iterations_used: iterations,
                    final_max_x: m,
                    trajectory,
                });
            }
            let next = self.step(&state)?;
            iterations += 1;
            if next.x == state.x && next.y == state.y {
                // Exact fixpoint above delta: nothing will ever move again.
                let m = next.max_x();
                if let Some(t) = trajectory.as_mut() {
                    t.push(m);
                }
                return Ok(DEOutcome {
                    converged: m < delta,
                    iterations_used: iterations,
                    final_max_x: m,
                    trajectory,
                });
            }
            state = next;
        }
    }

    /// Bisection for the bit-error threshold.
    pub fn threshold(&self, precision: f64) -> Result<ThresholdResult> {
        if precision < MIN_PRECISION {
            return Err(Error::Invalid(format!(
                "precision {precision} finer than supported {MIN_PRECISION}"
            )));
        }
        let converges = |eps: f64, this: &Self| -> Result<bool> {
            Ok(this.run(eps, DEFAULT_MAX_ITER, DEFAULT_DELTA, false)?.converged)
        };
        if converges(1.0, self)? {
            return Ok(ThresholdResult { value: 1.0, lo: 1.0, hi: 1.0 });
        }
        if !converges(0.0, self)? {
            return Ok(ThresholdResult { value: 0.0, lo: 0.0, hi: 0.0 });
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > precision {
            let mid = 0.5 * (lo + hi);
            if converges(mid, self)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(ThresholdResult { value: 0.5 * (lo + hi), lo, hi })
    }
}

/// For each socket s in `sockets`, writes f(prod of inputs at the others)
/// into out[s], entirely via prefix/suffix products (no division).
fn leave_one_out(
    sockets: &[usize],
    input: &[f64],
    out: &mut [f64],
    f: impl Fn(f64) -> f64,
) {
    match sockets {
        [] => {}
        [s] => out[*s] = f(1.0),
        _ => {
            let d = sockets.len();
            let mut suffix = vec![1.0; d + 1];
            for idx in (0..d).rev() {
                suffix[idx] = suffix[idx + 1] * input[sockets[idx]];
            }
            let mut prefix = 1.0;
            for idx in 0..d {
                out[sockets[idx]] = f(prefix * suffix[idx + 1]);
                prefix *= input[sockets[idx]];
            }
        }
    }
}

/// Initial state per the variable-node rules with all check messages at 1.
pub fn de_init(p: &Protograph, eps: f64) -> Result<EdgeErasureState> {
    DeSystem::new(p)?.init(eps)
}

/// One density-evolution iteration.
pub fn de_step(p: &Protograph, state: &EdgeErasureState) -> Result<EdgeErasureState> {
    DeSystem::new(p)?.step(state)
}

/// Runs density evolution at a fixed channel erasure probability.
pub fn de_run(p: &Protograph, eps: f64, max_iter: u32, delta: f64) -> Result<DEOutcome> {
    DeSystem::new(p)?.run(eps, max_iter, delta, false)
}

/// Bit-error threshold by bisection over the channel erasure probability.
pub fn bec_threshold(p: &Protograph, precision: f64) -> Result<ThresholdResult> {
    DeSystem::new(p)?.threshold(precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::parse_protograph;

    #[test]
    fn init_standard_degree_three() {
        let p = parse_protograph("3 1\n1\n1\n1\n").unwrap();
        let s = de_init(&p, 0.3).unwrap();
        assert_eq!(s.x, vec![0.3; 3]);
        assert_eq!(s.y, vec![1.0; 3]);
    }

    #[test]
    fn init_punctured_variable() {
        let p = parse_protograph("1 2\n1 1\npunctured 1\n").unwrap();
        let s = de_init(&p, 0.3).unwrap();
        assert_eq!(s.x[0], 1.0);
        assert_eq!(s.x[1], 0.3);
    }

    #[test]
    fn init_generalized_variable_extended_code() {
        // Variable with the (5,2) code: x^0 = h(1,...,1, eps, eps) per socket.
        let text = "5 1\n1\n1\n1\n1\n1\ncode pent 5 2 10101 01011\nvnode 1 code pent\n";
        let p = parse_protograph(text).unwrap();
        let s = de_init(&p, 0.5).unwrap();
        // All-on edge inputs: the polynomial reduces to the channel slots'
        // contribution; value must be a probability strictly between 0 and 1.
        for &x in &s.x {
            assert!(x > 0.0 && x < 1.0);
        }
        let s0 = de_init(&p, 0.0).unwrap();
        // With a perfect channel both information slots are known: positions
        // remain erased only if a confusion codeword needs no channel slots.
        for &x in &s0.x {
            assert!(x < 1.0);
        }
    }

    #[test]
    fn degree_one_variable_socket_stays_epsilon() {
        // v2 has degree 1 in a pendant chain.
        let p = parse_protograph("2 3\n1 1 0\n0 1 1\n").unwrap();
        let sys = DeSystem::new(&p).unwrap();
        let eps = 0.37;
        let mut s = sys.init(eps).unwrap();
        // Socket of variable 2 (degree 1) is index 3.
        let deg1_socket = p.var_sockets(2)[0];
        for _ in 0..50 {
            assert_eq!(s.x[deg1_socket], eps);
            s = sys.step(&s).unwrap();
        }
    }

    #[test]
    fn degree_two_variable_is_product_rule() {
        // x_{v,1} = eps * y_{v,2} for a degree-2 variable.
        let p = parse_protograph("2 1\n1\n1\n").unwrap();
        let sys = DeSystem::new(&p).unwrap();
        let eps = 0.6;
        let s0 = sys.init(eps).unwrap();
        let s1 = sys.step(&s0).unwrap();
        // Both checks have degree 1, so y = 0 after one step and x = 0.
        assert_eq!(s1.y, vec![0.0, 0.0]);
        assert_eq!(s1.x, vec![0.0, 0.0]);
    }

    #[test]
    fn run_converges_at_zero() {
        let p = parse_protograph("1 2\n1 1\n").unwrap();
        let out = de_run(&p, 0.0, 10, DEFAULT_DELTA).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations_used, 1);
        assert_eq!(out.final_max_x, 0.0);
    }

    #[test]
    fn run_diverges_at_one() {
        let p = parse_protograph("1 2\n1 1\n").unwrap();
        let out = de_run(&p, 1.0, 1000, DEFAULT_DELTA).unwrap();
        assert!(!out.converged);
        assert_eq!(out.final_max_x, 1.0);
        // Exact fixpoint is detected immediately, not at the iteration cap.
        assert!(out.iterations_used <= 3);
    }

    #[test]
    fn double_edge_single_check_threshold_near_one() {
        // x' = eps * x: the true threshold is 1; the iteration cap stops the
        // search where eps^max_iter first clears delta, near 0.994.
        let p = parse_protograph("1 1\n2\n").unwrap();
        let t = bec_threshold(&p, 1e-4).unwrap();
        assert!(t.value > 0.97, "got {}", t.value);
        assert!(t.hi >= t.value && t.value >= t.lo);
        assert!(t.hi - t.lo <= 1e-4);
    }

    #[test]
    fn three_six_regular_threshold() {
        // (3,6)-regular LDPC: classic threshold ~ 0.4294.
        let p = parse_protograph("3 6\n1 1 1 1 1 1\n1 1 1 1 1 1\n1 1 1 1 1 1\n").unwrap();
        let t = bec_threshold(&p, 1e-4).unwrap();
        assert!((t.value - 0.4294).abs() < 5e-4, "got {}", t.value);
    }

    #[test]
    fn monotone_in_epsilon() {
        let p = parse_protograph("2 3\n2 1 0\n0 1 2\n").unwrap();
        let sys = DeSystem::new(&p).unwrap();
        let (mut a, mut b) = (sys.init(0.3).unwrap(), sys.init(0.5).unwrap());
        for _ in 0..30 {
            for (xa, xb) in a.x.iter().zip(&b.x) {
                assert!(xa <= xb);
            }
            a = sys.step(&a).unwrap();
            b = sys.step(&b).unwrap();
        }
    }

    #[test]
    fn max_x_nonincreasing_in_iterations() {
        let p = parse_protograph("3 6\n1 1 1 1 1 1\n1 1 1 1 1 1\n1 1 1 1 1 1\n").unwrap();
        let sys = DeSystem::new(&p).unwrap();
        for eps in [0.2, 0.42, 0.6] {
            let mut s = sys.init(eps).unwrap();
            let mut prev = s.max_x();
            for _ in 0..60 {
                s = sys.step(&s).unwrap();
                let m = s.max_x();
                assert!(m <= prev + 1e-15);
                prev = m;
            }
        }
    }

    #[test]
    fn polynomial_kernels_match_closed_forms() {
        let p = parse_protograph("2 3\n2 1 0\n0 1 2\n").unwrap();
        let fast = DeSystem::new(&p).unwrap();
        let slow = DeSystem::with_polynomial_kernels(&p).unwrap();
        let (mut a, mut b) = (fast.init(0.45).unwrap(), slow.init(0.45).unwrap());
        for _ in 0..40 {
            for (u, v) in a.x.iter().zip(&b.x) {
                assert!((u - v).abs() < 1e-12);
            }
            for (u, v) in a.y.iter().zip(&b.y) {
                assert!((u - v).abs() < 1e-12);
            }
            a = fast.step(&a).unwrap();
            b = slow.step(&b).unwrap();
        }
    }

    #[test]
    fn threshold_consistency_band() {
        let p = parse_protograph("3 6\n1 1 1 1 1 1\n1 1 1 1 1 1\n1 1 1 1 1 1\n").unwrap();
        let sys = DeSystem::new(&p).unwrap();
        let t = sys.threshold(1e-4).unwrap();
        let lo = sys.run(t.value - 2e-4, DEFAULT_MAX_ITER, DEFAULT_DELTA, false).unwrap();
        let hi = sys.run(t.value + 2e-4, DEFAULT_MAX_ITER, DEFAULT_DELTA, false).unwrap();
        assert!(lo.converged);
        assert!(!hi.converged);
    }
}
