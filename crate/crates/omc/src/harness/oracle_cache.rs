//! Disk cache for ground-truth posterior samples.
//!
//! MCMC and rejection-ABC references are the expensive part of an
//! evaluation; they are keyed by (problem, dim, oracle seed, count) and
//! stored as samples CSV, so sweeps and repeated acceptance runs reuse
//! them.

use crate::core::ParamVector;
use crate::error::{Error, Result};
use crate::simulators::{ground_truth_samples, BenchmarkProblem};
use crate::streams::{substream, StreamKind};
use std::path::{Path, PathBuf};

fn cache_path(dir: &Path, problem: &str, dim: usize, seed: u64, count: usize) -> PathBuf {
    dir.join(format!("oracle_{problem}_d{dim}_s{seed}_n{count}.csv"))
}

fn load(path: &Path) -> Result<Vec<ParamVector>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with('m') || line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|t| t.parse().map_err(|_| Error::Format(format!("bad oracle row: {line}"))))
            .collect::<Result<_>>()?;
        out.push(ParamVector::new(values)?);
    }
    Ok(out)
}

/// Fetch (or compute and store) `count` oracle samples for a problem.
/// `cache_dir = None` always recomputes.
pub fn oracle_samples(
    problem: &BenchmarkProblem,
    dim: usize,
    count: usize,
    oracle_seed: u64,
    cache_dir: Option<&Path>,
) -> Result<Vec<ParamVector>> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, &problem.id, dim, oracle_seed, count);
        if path.exists() {
            let cached = load(&path)?;
            if cached.len() == count {
                return Ok(cached);
            }
        }
        let samples = compute(problem, count, oracle_seed)?;
        std::fs::create_dir_all(dir)?;
        crate::harness::csvio::write_file(&path, &crate::harness::csvio::samples_csv(&samples))?;
        Ok(samples)
    } else {
        compute(problem, count, oracle_seed)
    }
}

fn compute(problem: &BenchmarkProblem, count: usize, oracle_seed: u64) -> Result<Vec<ParamVector>> {
    let mut rng = substream(oracle_seed, StreamKind::Oracle, 0, 0);
    ground_truth_samples(problem, count, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulators::make_problem;

    #[test]
    fn cache_roundtrip_reproduces_samples() {
        let dir = tempfile::tempdir().unwrap();
        let problem = make_problem("mog_base", 2).unwrap();
        let fresh = oracle_samples(&problem, 2, 50, 9, Some(dir.path())).unwrap();
        let cached = oracle_samples(&problem, 2, 50, 9, Some(dir.path())).unwrap();
        assert_eq!(fresh.len(), cached.len());
        for (a, b) in fresh.iter().zip(&cached) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-12, "cache must reproduce samples");
            }
        }
    }
}
