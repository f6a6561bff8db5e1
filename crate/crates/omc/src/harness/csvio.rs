//! CSV emission with fixed, versioned schemas.
//!
//! Numbers are written with Rust's shortest-roundtrip float formatting, so
//! a run with a fixed master seed reproduces its CSV files byte for byte.
//! Wall-clock never enters the inference CSVs; the sweep results file is
//! the one schema carrying a runtime column.

use crate::core::ParamVector;
use crate::error::Result;
use crate::optimize::OptimizationRecord;
use crate::posterior::WeightedSample;
use std::fmt::Write as _;
use std::path::Path;

pub const RECORDS_SCHEMA: &str = "# omc records v1";
pub const WEIGHTED_SCHEMA: &str = "# omc weighted-samples v1";
pub const SAMPLES_SCHEMA: &str = "# omc samples v1";
pub const RESULTS_SCHEMA: &str =
    "# omc results v1: c2st rows per (problem, dim, seeds, repetition)";

fn num(buf: &mut String, v: f64) {
    if v == v.trunc() && v.abs() < 1e15 {
        // keep integral floats compact and unambiguous
        let _ = write!(buf, "{:.1}", v);
    } else {
        let _ = write!(buf, "{}", v);
    }
}

/// Optimization record table: one row per (observation, seed).
pub fn records_csv(records: &[OptimizationRecord]) -> String {
    let dim = records.first().map_or(0, |r| r.theta_star.len());
    let mut out = String::new();
    out.push_str(RECORDS_SCHEMA);
    out.push('\n');
    out.push_str("n,i,d_star,accepted");
    for k in 0..dim {
        let _ = write!(out, ",theta_{k}");
    }
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},", r.obs_index, r.seed_index);
        num(&mut out, r.d_star);
        let _ = write!(out, ",{}", u8::from(r.accepted));
        for v in &r.theta_star {
            out.push(',');
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

/// Weighted candidate table: θ components, proposal and prior densities,
/// per-observation counts, weight.
pub fn weighted_csv(weighted: &[WeightedSample]) -> String {
    let dim = weighted.first().map_or(0, |w| w.theta.len());
    let n_obs = weighted.first().map_or(0, |w| w.region_counts.len());
    let mut out = String::new();
    out.push_str(WEIGHTED_SCHEMA);
    out.push('\n');
    out.push_str("p");
    for k in 0..dim {
        let _ = write!(out, ",theta_{k}");
    }
    out.push_str(",q,prior");
    for n in 0..n_obs {
        let _ = write!(out, ",count_{n}");
    }
    out.push_str(",w\n");
    for (idx, w) in weighted.iter().enumerate() {
        let _ = write!(out, "{idx}");
        for v in &w.theta {
            out.push(',');
            num(&mut out, *v);
        }
        out.push(',');
        num(&mut out, w.proposal_density);
        out.push(',');
        num(&mut out, w.prior_density);
        for c in &w.region_counts {
            let _ = write!(out, ",{c}");
        }
        out.push(',');
        num(&mut out, w.weight);
        out.push('\n');
    }
    out
}

/// Final posterior samples, one row each.
pub fn samples_csv(samples: &[ParamVector]) -> String {
    let dim = samples.first().map_or(0, |s| s.dim());
    let mut out = String::new();
    out.push_str(SAMPLES_SCHEMA);
    out.push('\n');
    out.push_str("m");
    for k in 0..dim {
        let _ = write!(out, ",theta_{k}");
    }
    out.push('\n');
    for (idx, s) in samples.iter().enumerate() {
        let _ = write!(out, "{idx}");
        for v in s.values() {
            out.push(',');
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

/// One sweep-cell evaluation row.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub problem: String,
    pub method: String,
    pub dim: usize,
    pub seeds: usize,
    pub rep: usize,
    pub master_seed: u64,
    pub c2st: f64,
    pub runtime_seconds: f64,
    pub vectorized_calls: u64,
    pub instance_evaluations: u64,
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(RESULTS_SCHEMA);
    out.push('\n');
    out.push_str(
        "problem,method,dim,seeds,rep,master_seed,c2st,runtime_seconds,vectorized_calls,instance_evaluations\n",
    );
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},",
            r.problem, r.method, r.dim, r.seeds, r.rep, r.master_seed
        );
        num(&mut out, r.c2st);
        out.push(',');
        num(&mut out, r.runtime_seconds);
        let _ = write!(out, ",{},{}", r.vectorized_calls, r.instance_evaluations);
        out.push('\n');
    }
    out
}

/// Parse a results CSV produced by [`results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("problem,") || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 10 {
            return Err(crate::error::Error::Format(format!(
                "results row has {} fields, expected 10: {line}",
                parts.len()
            )));
        }
        let parse_err = |what: &str| {
            crate::error::Error::Format(format!("cannot parse {what} in results row: {line}"))
        };
        rows.push(ResultRow {
            problem: parts[0].to_string(),
            method: parts[1].to_string(),
            dim: parts[2].parse().map_err(|_| parse_err("dim"))?,
            seeds: parts[3].parse().map_err(|_| parse_err("seeds"))?,
            rep: parts[4].parse().map_err(|_| parse_err("rep"))?,
            master_seed: parts[5].parse().map_err(|_| parse_err("master_seed"))?,
            c2st: parts[6].parse().map_err(|_| parse_err("c2st"))?,
            runtime_seconds: parts[7].parse().map_err(|_| parse_err("runtime"))?,
            vectorized_calls: parts[8].parse().map_err(|_| parse_err("vectorized"))?,
            instance_evaluations: parts[9].parse().map_err(|_| parse_err("instances"))?,
        });
    }
    Ok(rows)
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_roundtrip() {
        let rows = vec![ResultRow {
            problem: "mog_base".into(),
            method: "omc".into(),
            dim: 2,
            seeds: 1000,
            rep: 0,
            master_seed: 7,
            c2st: 0.5625,
            runtime_seconds: 1.25,
            vectorized_calls: 42,
            instance_evaluations: 420,
        }];
        let text = results_csv(&rows);
        assert!(text.starts_with(RESULTS_SCHEMA));
        let back = parse_results_csv(&text).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn float_formatting_is_stable() {
        let mut buf = String::new();
        num(&mut buf, 1.0);
        buf.push(' ');
        num(&mut buf, 0.1);
        buf.push(' ');
        num(&mut buf, -3.25e-7);
        assert_eq!(buf, "1.0 0.1 -0.000000325");
    }
}

