//! Monte Carlo erasure-channel simulation of lifted codes.
//!
//! All-zero codeword, iid erasures on transmitted variables, punctured
//! variables start erased. Decoding is peeling: each check keeps a count of
//! erased neighbors and the XOR of their indices, so a degree-one check
//! yields its erased variable in O(1). Trials are batched and each trial
//! seeds its own generator from (seed, trial index), so results do not
//! depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lift::SparseCode;

/// Trials per scheduling unit.
pub const BATCH_TRIALS: u64 = 4096;
/// Default early-stop target on block errors.
pub const DEFAULT_BLOCK_ERROR_LIMIT: u64 = 200;
/// Batches evaluated in parallel between early-stop checks.
const WAVE_BATCHES: u64 = 256;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// Stop after the batch in which this many block errors accumulate;
    /// `None` runs every requested trial.
    pub block_error_limit: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimResult {
    pub epsilon: f64,
    /// Trials actually evaluated (early stop rounds to a whole batch).
    pub trials: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    /// Unresolved-bit rate over transmitted positions.
    pub ber: f64,
    pub fer: f64,
    /// Normal-approximation 95% half-widths.
    pub ber_ci: f64,
    pub fer_ci: f64,
}

/// Runs peeling to its fixpoint; `erased` is updated in place and the
/// number of still-erased variables is returned.
pub fn peel(code: &SparseCode, erased: &mut [bool]) -> usize {
    let m = code.num_checks();
    let mut count = vec![0u32; m];
    let mut acc = vec![0usize; m];
    for i in 0..m {
        for &v in code.check_neighbors(i) {
            if erased[v] {
                count[i] += 1;
                acc[i] ^= v;
            }
        }
    }
    let mut stack: Vec<usize> = (0..m).filter(|&i| count[i] == 1).collect();
    while let Some(i) = stack.pop() {
        if count[i] != 1 {
            continue;
        }
        let v = acc[i];
        erased[v] = false;
        for &c in code.var_neighbors(v) {
            count[c] -= 1;
            acc[c] ^= v;
            if count[c] == 1 {
                stack.push(c);
            }
        }
    }
    erased.iter().filter(|&&e| e).count()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

struct BatchTally {
    trials: u64,
    bit_errors: u64,
    block_errors: u64,
}

fn run_batch(code: &SparseCode, cfg: &SimConfig, batch: u64) -> BatchTally {
    let lo = batch * BATCH_TRIALS;
    let hi = (lo + BATCH_TRIALS).min(cfg.trials);
    let mut tally = BatchTally { trials: hi - lo, bit_errors: 0, block_errors: 0 };
    let mut erased = vec![false; code.num_vars()];
    for t in lo..hi {
        let mut rng = trial_rng(cfg.seed, t);
        for (v, slot) in erased.iter_mut().enumerate() {
            *slot = code.is_punctured(v) || rng.gen::<f64>() < cfg.epsilon;
        }
        let unresolved = peel(code, &mut erased);
        if unresolved > 0 {
            tally.block_errors += 1;
            tally.bit_errors += erased
                .iter()
                .enumerate()
                .filter(|&(v, &e)| e && !code.is_punctured(v))
                .count() as u64;
        }
    }
    tally
}

/// Simulates transmission at one erasure probability.
pub fn simulate_bec(code: &SparseCode, cfg: &SimConfig) -> Result<SimResult> {
    if !(0.0..=1.0).contains(&cfg.epsilon) {
        return Err(Error::Invalid("erasure probability must lie in [0,1]".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    let total_batches = cfg.trials.div_ceil(BATCH_TRIALS);
    let mut trials = 0u64;
    let mut bit_errors = 0u64;
    let mut block_errors = 0u64;
    let mut batch = 0u64;
    'outer: while batch < total_batches {
        let wave_end = (batch + WAVE_BATCHES).min(total_batches);
        let tallies: Vec<BatchTally> = (batch..wave_end)
            .into_par_iter()
            .map(|b| run_batch(code, cfg, b))
            .collect();
        for t in tallies {
            trials += t.trials;
            bit_errors += t.bit_errors;
            block_errors += t.block_errors;
            if cfg.block_error_limit.is_some_and(|limit| block_errors >= limit) {
                break 'outer;
            }
        }
        batch = wave_end;
    }
    let bits = trials * code.num_transmitted() as u64;
    let ber = if bits == 0 { 0.0 } else { bit_errors as f64 / bits as f64 };
    let fer = block_errors as f64 / trials as f64;
    let half_width = |p: f64, n: u64| {
        if n == 0 {
            0.0
        } else {
            1.96 * (p * (1.0 - p) / n as f64).sqrt()
        }
    };
    Ok(SimResult {
        epsilon: cfg.epsilon,
        trials,
        bit_errors,
        block_errors,
        ber,
        fer,
        ber_ci: half_width(ber, bits),
        fer_ci: half_width(fer, trials),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::lift;
    use crate::protograph::parse_protograph;

    fn small_code() -> SparseCode {
        let p = parse_protograph("2 4\n1 1 1 1\n1 1 1 1\n").unwrap();
        lift(&p, 4).unwrap().code
    }

    #[test]
    fn degree_one_check_resolves_its_variable() {
        let code = SparseCode::new(2, vec![vec![0, 1], vec![1]], vec![false, false]).unwrap();
        let mut erased = vec![true, true];
        assert_eq!(peel(&code, &mut erased), 0);
        assert_eq!(erased, vec![false, false]);
    }

    #[test]
    fn parallel_edges_carry_no_information() {
        let code = SparseCode::new(1, vec![vec![0, 0]], vec![false]).unwrap();
        let mut erased = vec![true];
        assert_eq!(peel(&code, &mut erased), 1);
    }

    #[test]
    fn endpoints_of_the_erasure_range() {
        let code = small_code();
        let clean = SimConfig { epsilon: 0.0, trials: 300, seed: 7, block_error_limit: None };
        let all = SimConfig { epsilon: 1.0, trials: 300, seed: 7, block_error_limit: None };
        assert_eq!(simulate_bec(&code, &clean).unwrap().fer, 0.0);
        assert_eq!(simulate_bec(&code, &all).unwrap().fer, 1.0);
    }

    #[test]
    fn same_seed_same_result() {
        let code = small_code();
        let cfg = SimConfig { epsilon: 0.4, trials: 5000, seed: 11, block_error_limit: None };
        let a = simulate_bec(&code, &cfg).unwrap();
        let b = simulate_bec(&code, &cfg).unwrap();
        assert_eq!(a.bit_errors, b.bit_errors);
        assert_eq!(a.block_errors, b.block_errors);
        assert_eq!(a.trials, cfg.trials);
    }

    #[test]
    fn early_stop_rounds_to_a_batch() {
        let code = small_code();
        let cfg = SimConfig {
            epsilon: 0.9,
            trials: 100_000,
            seed: 3,
            block_error_limit: Some(10),
        };
        let r = simulate_bec(&code, &cfg).unwrap();
        assert!(r.block_errors >= 10);
        assert_eq!(r.trials, BATCH_TRIALS);
    }

    #[test]
    fn punctured_variables_do_not_count_as_bit_errors() {
        let code = SparseCode::new(1, vec![vec![]], vec![true]).unwrap();
        let cfg = SimConfig { epsilon: 0.5, trials: 100, seed: 1, block_error_limit: None };
        let r = simulate_bec(&code, &cfg).unwrap();
        assert_eq!(r.fer, 1.0);
        assert_eq!(r.bit_errors, 0);
        assert_eq!(r.ber, 0.0);
    }

    #[test]
    fn fer_is_monotone_in_epsilon() {
        let code = small_code();
        let mut prev = -1.0;
        for eps in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let cfg = SimConfig { epsilon: eps, trials: 4000, seed: 19, block_error_limit: None };
            let fer = simulate_bec(&code, &cfg).unwrap().fer;
            assert!(fer + 0.05 >= prev, "eps={eps}");
            prev = fer;
        }
    }
}
