//! Budget sweeps over (problem, dimension, seed count) with per-cell C2ST
//! evaluation against the problem's oracle, and the success-frontier
//! extraction used by the plots.

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::csvio::ResultRow;
use crate::harness::oracle_cache::oracle_samples;
use crate::harness::runner::run_inference;
use crate::metrics::{c2st, C2stConfig};
use crate::simulators::make_problem;
use crate::streams::mix;
use std::path::PathBuf;

/// Mean C2ST at or below this marks a budget as successful; sweeps skip
/// higher budgets for a dimension once it is reached.
pub const SUCCESS_THRESHOLD: f64 = 0.75;

/// Seed of the oracle sample sets used in sweeps.
pub const ORACLE_SEED: u64 = 777;

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub problem: String,
    pub dims: Vec<usize>,
    pub seeds_list: Vec<usize>,
    pub repetitions: usize,
    pub base_master_seed: u64,
    pub oracle_cache: Option<PathBuf>,
    pub comparison_samples: usize,
}

impl SweepSpec {
    pub fn new(problem: &str, dims: Vec<usize>, seeds_list: Vec<usize>, reps: usize) -> Self {
        Self {
            problem: problem.to_string(),
            dims,
            seeds_list,
            repetitions: reps,
            base_master_seed: 0,
            oracle_cache: None,
            comparison_samples: 1000,
        }
    }
}

/// Master seed of one sweep cell repetition.
pub fn cell_master_seed(base: u64, dim: usize, seeds: usize, rep: usize) -> u64 {
    mix(mix(mix(base, dim as u64), seeds as u64), rep as u64)
}

/// Run the sweep. Budgets are visited in ascending order per dimension and
/// abandoned early once the mean score meets [`SUCCESS_THRESHOLD`] — higher
/// budgets then emit no rows.
pub fn run_benchmark_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    if spec.dims.is_empty() || spec.seeds_list.is_empty() {
        return Err(crate::error::Error::Config("sweep needs dims and seed counts".into()));
    }
    let mut seeds_sorted = spec.seeds_list.clone();
    seeds_sorted.sort_unstable();
    let mut rows = Vec::new();
    for &dim in &spec.dims {
        let problem = make_problem(&spec.problem, dim)?;
        let oracle = oracle_samples(
            &problem,
            dim,
            spec.comparison_samples,
            ORACLE_SEED,
            spec.oracle_cache.as_deref(),
        )?;
        for &seeds in &seeds_sorted {
            let mut cell_scores = Vec::with_capacity(spec.repetitions);
            for rep in 0..spec.repetitions {
                let master = cell_master_seed(spec.base_master_seed, dim, seeds, rep);
                let mut cfg = ExperimentConfig::for_problem(&spec.problem, dim)?;
                cfg.seeds = seeds;
                cfg.sampling.final_samples = spec.comparison_samples;
                cfg.sampling.candidates = cfg.sampling.candidates.max(cfg.sampling.final_samples);
                cfg.master_seed = master;
                let out = run_inference(&problem, &cfg)?;
                let score = c2st(
                    &out.samples,
                    &oracle,
                    &C2stConfig::with_seed(mix(master, 0xc251)),
                )?;
                cell_scores.push(score.value);
                rows.push(ResultRow {
                    problem: spec.problem.clone(),
                    method: "omc".into(),
                    dim,
                    seeds,
                    rep,
                    master_seed: master,
                    c2st: score.value,
                    runtime_seconds: out.report.runtime_seconds,
                    vectorized_calls: out.report.budget.vectorized_calls,
                    instance_evaluations: out.report.budget.instance_evaluations,
                });
            }
            let mean = cell_scores.iter().sum::<f64>() / cell_scores.len() as f64;
            if mean <= SUCCESS_THRESHOLD {
                break;
            }
        }
    }
    Ok(rows)
}

/// Mean C2ST and runtime per (problem, dim, seeds) cell, ordered as they
/// appear in the rows.
pub fn cell_means(rows: &[ResultRow]) -> Vec<(String, usize, usize, f64, f64)> {
    let mut out: Vec<(String, usize, usize, f64, f64, usize)> = Vec::new();
    for r in rows {
        if let Some(cell) = out
            .iter_mut()
            .find(|(p, d, s, ..)| p == &r.problem && *d == r.dim && *s == r.seeds)
        {
            cell.3 += r.c2st;
            cell.4 += r.runtime_seconds;
            cell.5 += 1;
        } else {
            out.push((r.problem.clone(), r.dim, r.seeds, r.c2st, r.runtime_seconds, 1));
        }
    }
    out.into_iter()
        .map(|(p, d, s, c, t, n)| (p, d, s, c / n as f64, t / n as f64))
        .collect()
}

/// Success frontier: the smallest budget whose mean score meets the
/// threshold, per (problem, dim); `None` when no budget succeeded.
pub fn frontier(
    rows: &[ResultRow],
    threshold: f64,
) -> Vec<(String, usize, Option<(usize, f64, f64)>)> {
    let means = cell_means(rows);
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(p, d)| p == &r.problem && *d == r.dim) {
            keys.push((r.problem.clone(), r.dim));
        }
    }
    keys.into_iter()
        .map(|(p, d)| {
            let best = means
                .iter()
                .filter(|(mp, md, _, mc, _)| mp == &p && *md == d && *mc <= threshold)
                .min_by_key(|(_, _, s, ..)| *s)
                .map(|(_, _, s, c, t)| (*s, *c, *t));
            (p, d, best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(problem: &str, dim: usize, seeds: usize, rep: usize, c: f64) -> ResultRow {
        ResultRow {
            problem: problem.into(),
            method: "omc".into(),
            dim,
            seeds,
            rep,
            master_seed: 0,
            c2st: c,
            runtime_seconds: seeds as f64 * 0.001,
            vectorized_calls: seeds as u64,
            instance_evaluations: seeds as u64 * 10,
        }
    }

    #[test]
    fn frontier_picks_the_smallest_successful_budget() {
        let rows = vec![
            row("p", 2, 100, 0, 0.9),
            row("p", 2, 100, 1, 0.8),
            row("p", 2, 1000, 0, 0.7),
            row("p", 2, 1000, 1, 0.6),
            row("p", 2, 5000, 0, 0.55),
            row("p", 5, 100, 0, 0.99),
        ];
        let f = frontier(&rows, 0.75);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].2.unwrap().0, 1000);
        assert!(f[1].2.is_none());
    }

    #[test]
    fn cell_means_average_over_repetitions() {
        let rows = vec![row("p", 2, 100, 0, 0.6), row("p", 2, 100, 1, 0.8)];
        let means = cell_means(&rows);
        assert_eq!(means.len(), 1);
        assert!((means[0].3 - 0.7).abs() < 1e-12);
    }
}
