//! Differential-evolution search over protograph base matrices.
//!
//! The search space is the integer base matrix with a fixed node structure:
//! generalized placements, their component codes, and the puncturing pattern
//! all come from a template and never move. Every population member must
//! hold a true recoverability certificate; candidates that lose it are never
//! selected. Evaluation is deterministic per (seed, generation, slot), so
//! parallel scheduling cannot change the outcome.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certify::check_block_condition;
use crate::debec::bec_threshold;
use crate::error::{Error, Result};
use crate::pexit::awgn_threshold;
use crate::protograph::{CodeAssignment, Protograph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Bec,
    Biawgn,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Population slots; defaults to checks * variables.
    pub population_size: Option<usize>,
    /// Largest base-matrix entry.
    pub entry_max: u32,
    /// Differential weight applied to the donor difference.
    pub differential_weight: f64,
    /// Per-entry probability of taking the mutant value.
    pub crossover_rate: f64,
    pub generations: u32,
    pub rng_seed: u64,
    pub channel: Channel,
    /// Threshold bisection width during the search.
    pub search_precision: f64,
    /// Threshold bisection width for the returned winner.
    pub final_precision: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population_size: None,
            entry_max: 8,
            differential_weight: 0.5,
            crossover_rate: 0.88,
            generations: 6000,
            rng_seed: 0,
            channel: Channel::Bec,
            search_precision: 1e-3,
            final_precision: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub protograph: Protograph,
    pub threshold: f64,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub best: Candidate,
    /// Best in-population threshold after seeding and after each
    /// generation.
    pub history: Vec<f64>,
}

const REPAIR_ATTEMPTS: usize = 64;
const RESAMPLE_CAP: usize = 200;
const SUM_REPAIR_FUSE: usize = 10_000;

fn stream(seed: u64, generation: u32, slot: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&generation.to_le_bytes());
    key[16..24].copy_from_slice(&(slot as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn better(channel: Channel, a: f64, b: f64) -> bool {
    match channel {
        Channel::Bec => a > b,
        Channel::Biawgn => a < b,
    }
}

/// Donor combination: |b1 + w(b2 - b3)|, rounded, clamped to [0, cap].
fn mix_entry(b1: u32, b2: u32, b3: u32, weight: f64, cap: u32) -> u32 {
    let v = (b1 as f64 + weight * (b2 as f64 - b3 as f64)).abs().round();
    (v as u32).min(cap)
}

/// Walks random cells until the slice sums to `target`.
fn adjust_sum(cells: &mut [&mut u32], target: i64, cap: u32, rng: &mut ChaCha8Rng) -> bool {
    if target < 0 || target > cap as i64 * cells.len() as i64 {
        return false;
    }
    for _ in 0..SUM_REPAIR_FUSE {
        let current: i64 = cells.iter().map(|c| **c as i64).sum();
        if current == target {
            return true;
        }
        let idx = rng.gen_range(0..cells.len());
        if current < target && *cells[idx] < cap {
            *cells[idx] += 1;
        } else if current > target && *cells[idx] > 0 {
            *cells[idx] -= 1;
        }
    }
    false
}

/// Draws a matrix with uniform entries, then repairs generalized rows and
/// columns to their code lengths. Column repair only touches rows with
/// standard checks, so row sums stay intact.
fn random_matrix(
    template: &Protograph,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<u32>>> {
    let nc = template.num_checks();
    let nv = template.num_vars();
    let mut m: Vec<Vec<u32>> =
        (0..nc).map(|_| (0..nv).map(|_| rng.gen_range(0..=cfg.entry_max)).collect()).collect();
    for i in 0..nc {
        if let Some(a) = template.check_code(i) {
            let target = a.code.len() as i64;
            let mut row: Vec<&mut u32> = m[i].iter_mut().collect();
            if !adjust_sum(&mut row, target, cfg.entry_max, rng) {
                return None;
            }
        }
    }
    for j in 0..nv {
        if let Some(a) = template.var_code(j) {
            let fixed: i64 = (0..nc)
                .filter(|&i| template.check_code(i).is_some())
                .map(|i| m[i][j] as i64)
                .sum();
            let target = a.code.len() as i64 - fixed;
            let mut col: Vec<&mut u32> = m
                .iter_mut()
                .enumerate()
                .filter(|(i, _)| template.check_code(*i).is_none())
                .map(|(_, row)| &mut row[j])
                .collect();
            if !adjust_sum(&mut col, target, cfg.entry_max, rng) {
                return None;
            }
        }
    }
    Some(m)
}

fn redraw_labels(code_len: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    if degree != code_len {
        return None;
    }
    let mut labels: Vec<usize> = (0..code_len).collect();
    labels.shuffle(rng);
    Some(labels)
}

/// Builds a candidate protograph around `matrix`, carrying the template's
/// fixed structure. Labels of generalized nodes listed in `relabel` are
/// drawn fresh; the rest are copied from `labels_from`.
fn assemble(
    template: &Protograph,
    matrix: Vec<Vec<u32>>,
    labels_from: &Protograph,
    relabel_vars: &[bool],
    relabel_checks: &[bool],
    rng: &mut ChaCha8Rng,
) -> Result<Protograph> {
    let nv = template.num_vars();
    let nc = template.num_checks();
    let col_degree = |j: usize| (0..nc).map(|i| matrix[i][j] as usize).sum::<usize>();
    let row_degree = |i: usize| (0..nv).map(|j| matrix[i][j] as usize).sum::<usize>();
    let var_codes: Vec<Option<CodeAssignment>> = (0..nv)
        .map(|j| {
            template.var_code(j).map(|a| {
                if relabel_vars[j] {
                    CodeAssignment::new(
                        a.name.clone(),
                        a.code.clone(),
                        redraw_labels(a.code.len(), col_degree(j), rng),
                    )
                } else {
                    labels_from.var_code(j).cloned().unwrap_or_else(|| a.clone())
                }
            })
        })
        .collect();
    let check_codes: Vec<Option<CodeAssignment>> = (0..nc)
        .map(|i| {
            template.check_code(i).map(|a| {
                if relabel_checks[i] {
                    CodeAssignment::new(
                        a.name.clone(),
                        a.code.clone(),
                        redraw_labels(a.code.len(), row_degree(i), rng),
                    )
                } else {
                    labels_from.check_code(i).cloned().unwrap_or_else(|| a.clone())
                }
            })
        })
        .collect();
    let punctured: BTreeSet<usize> = template.punctured().clone();
    Protograph::new_unchecked(matrix, punctured, var_codes, check_codes)
}

fn evaluate(
    p: Protograph,
    cfg: &OptimizerConfig,
    required_info: i64,
    precision: f64,
) -> Candidate {
    let worst = match cfg.channel {
        Channel::Bec => 0.0,
        Channel::Biawgn => f64::INFINITY,
    };
    if !p.validate().ok {
        return Candidate { protograph: p, threshold: worst, certified: false };
    }
    // A node the matrix dropped entirely would shrink the graph and fake a
    // better threshold; such candidates never count as certified.
    let degenerate = (0..p.num_vars()).any(|j| p.var_degree(j) == 0)
        || (0..p.num_checks()).any(|i| p.check_degree(i) == 0);
    if degenerate {
        return Candidate { protograph: p, threshold: worst, certified: false };
    }
    let verdict = match check_block_condition(&p, required_info) {
        Ok(c) => c.verdict,
        Err(_) => false,
    };
    if !verdict {
        return Candidate { protograph: p, threshold: worst, certified: false };
    }
    let threshold = match cfg.channel {
        Channel::Bec => bec_threshold(&p, precision).map(|t| t.value),
        Channel::Biawgn => awgn_threshold(&p, precision).map(|t| t.value),
    };
    match threshold {
        Ok(t) => Candidate { protograph: p, threshold: t, certified: true },
        Err(_) => Candidate { protograph: p, threshold: worst, certified: false },
    }
}

fn seed_candidate(
    template: &Protograph,
    cfg: &OptimizerConfig,
    required_info: i64,
    rng: &mut ChaCha8Rng,
) -> Result<Candidate> {
    let relabel_all_v = vec![true; template.num_vars()];
    let relabel_all_c = vec![true; template.num_checks()];
    for _ in 0..RESAMPLE_CAP {
        let Some(mut matrix) = random_matrix(template, cfg, rng) else {
            continue;
        };
        let Ok(p) = assemble(template, matrix.clone(), template, &relabel_all_v, &relabel_all_c, rng)
        else {
            continue;
        };
        let mut cand = evaluate(p, cfg, required_info, cfg.search_precision);
        let mut attempts = 0;
        while !cand.certified && attempts < REPAIR_ATTEMPTS {
            attempts += 1;
            // Low-degree standard variables are the usual certificate
            // blockers; thicken one of them.
            let weak: Vec<usize> = (0..template.num_vars())
                .filter(|&j| template.var_code(j).is_none())
                .filter(|&j| (0..template.num_checks()).map(|i| matrix[i][j] as usize).sum::<usize>() <= 2)
                .collect();
            let hosts: Vec<usize> =
                (0..template.num_checks()).filter(|&i| template.check_code(i).is_none()).collect();
            let (Some(&j), Some(&i)) = (weak.choose(rng), hosts.choose(rng)) else {
                break;
            };
            if matrix[i][j] >= cfg.entry_max {
                continue;
            }
            matrix[i][j] += 1;
            let Ok(p) =
                assemble(template, matrix.clone(), template, &relabel_all_v, &relabel_all_c, rng)
            else {
                break;
            };
            cand = evaluate(p, cfg, required_info, cfg.search_precision);
        }
        if cand.certified {
            return Ok(cand);
        }
    }
    Err(Error::Search(
        "could not seed a certified population member; relax the structure".into(),
    ))
}

fn trial_candidate(
    population: &[Candidate],
    k: usize,
    template: &Protograph,
    cfg: &OptimizerConfig,
    required_info: i64,
    rng: &mut ChaCha8Rng,
) -> Option<Candidate> {
    let size = population.len();
    let mut pick = || loop {
        let r = rng.gen_range(0..size);
        if r != k {
            return r;
        }
    };
    let (r1, mut r2, mut r3) = (pick(), pick(), pick());
    while r2 == r1 {
        r2 = pick();
    }
    while r3 == r1 || r3 == r2 {
        r3 = pick();
    }
    let (b1, b2, b3) = (
        population[r1].protograph.matrix(),
        population[r2].protograph.matrix(),
        population[r3].protograph.matrix(),
    );
    let parent = &population[k].protograph;
    let pm = parent.matrix();
    let nc = template.num_checks();
    let nv = template.num_vars();
    let mut trial = vec![vec![0u32; nv]; nc];
    for i in 0..nc {
        for j in 0..nv {
            let mutant = mix_entry(b1[i][j], b2[i][j], b3[i][j], cfg.differential_weight, cfg.entry_max);
            trial[i][j] = if rng.gen::<f64>() < cfg.crossover_rate { mutant } else { pm[i][j] };
        }
    }
    let relabel_vars: Vec<bool> = (0..nv)
        .map(|j| template.var_code(j).is_some() && (0..nc).any(|i| trial[i][j] != pm[i][j]))
        .collect();
    let relabel_checks: Vec<bool> = (0..nc)
        .map(|i| template.check_code(i).is_some() && (0..nv).any(|j| trial[i][j] != pm[i][j]))
        .collect();
    let p = assemble(template, trial, parent, &relabel_vars, &relabel_checks, rng).ok()?;
    Some(evaluate(p, cfg, required_info, cfg.search_precision))
}

fn best_of(population: &[Candidate], channel: Channel) -> usize {
    let mut best = 0;
    for k in 1..population.len() {
        if better(channel, population[k].threshold, population[best].threshold) {
            best = k;
        }
    }
    best
}

/// Runs the search. The template fixes the dimensions, generalized
/// placements, component codes, and puncturing; its matrix entries are not
/// used.
pub fn optimize(template: &Protograph, cfg: &OptimizerConfig) -> Result<OptimizeOutcome> {
    let required_info = template.info_count();
    if required_info <= 0 {
        return Err(Error::Invalid(
            "template admits no information positions; nothing to optimize".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.crossover_rate) {
        return Err(Error::Invalid("crossover rate must lie in [0,1]".into()));
    }
    let size = cfg.population_size.unwrap_or(template.num_checks() * template.num_vars());
    if size < 4 {
        return Err(Error::Invalid("population size must be at least 4".into()));
    }

    let mut population: Vec<Candidate> = (0..size)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(cfg.rng_seed, 0, k);
            seed_candidate(template, cfg, required_info, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut history = vec![population[best_of(&population, cfg.channel)].threshold];

    for g in 1..=cfg.generations {
        let trials: Vec<Option<Candidate>> = (0..size)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(cfg.rng_seed, g, k);
                trial_candidate(&population, k, template, cfg, required_info, &mut rng)
            })
            .collect();
        for (k, trial) in trials.into_iter().enumerate() {
            if let Some(t) = trial {
                if t.certified
                    && (!population[k].certified || better(cfg.channel, t.threshold, population[k].threshold))
                {
                    population[k] = t;
                }
            }
        }
        history.push(population[best_of(&population, cfg.channel)].threshold);
    }

    let winner = &population[best_of(&population, cfg.channel)];
    let best = evaluate(
        winner.protograph.clone(),
        cfg,
        required_info,
        cfg.final_precision,
    );
    Ok(OptimizeOutcome { best, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::parse_protograph;

    #[test]
    fn donor_combination_matches_expected_values() {
        assert_eq!(mix_entry(2, 3, 1, 0.5, 8), 3);
        assert_eq!(mix_entry(0, 0, 4, 0.5, 8), 2);
        assert_eq!(mix_entry(8, 8, 0, 0.5, 8), 8);
        assert_eq!(mix_entry(0, 4, 0, 0.5, 8), 2);
    }

    #[test]
    fn generalized_sums_are_enforced_at_sampling() {
        let text = "2 2\n3 2\n1 1\ncode c5 5 4 11000 01100 00110 00011\ncnode 1 code c5\n";
        let template = parse_protograph(text).unwrap();
        let cfg = OptimizerConfig::default();
        for seed in 0..20 {
            let mut rng = stream(seed, 0, 0);
            if let Some(m) = random_matrix(&template, &cfg, &mut rng) {
                let row0: u32 = m[0].iter().sum();
                assert_eq!(row0, 5, "seed {seed}");
            }
        }
    }

    #[test]
    fn short_search_improves_and_repeats_exactly() {
        let template = parse_protograph("2 4\n0 0 0 0\n0 0 0 0\n").unwrap();
        let cfg = OptimizerConfig {
            population_size: Some(8),
            generations: 3,
            rng_seed: 42,
            search_precision: 1e-3,
            final_precision: 1e-3,
            ..OptimizerConfig::default()
        };
        let a = optimize(&template, &cfg).unwrap();
        let b = optimize(&template, &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best.protograph.matrix(), b.best.protograph.matrix());
        assert_eq!(a.history.len(), 4);
        assert!(a.best.certified);
        for w in a.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert!(a.history[0] > 0.0);
    }

    #[test]
    fn overconstrained_template_is_rejected() {
        let template = parse_protograph("2 2\n0 0\n0 0\n").unwrap();
        assert!(optimize(&template, &OptimizerConfig::default()).is_err());
    }
}
