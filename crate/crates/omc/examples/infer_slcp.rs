//! Multiple i.i.d. observations: the four two-dimensional draws of the
//! SLCP task are treated as N = 4 separate observations. Per-observation
//! proposals are pooled into one mixture and the weights keep only samples
//! within ε of at least one accepted seed for every observation.
//!
//! Run with: `cargo run --release --example infer_slcp [--distractors]`

use omc::harness::config::ExperimentConfig;
use omc::harness::oracle_cache::oracle_samples;
use omc::harness::runner::{posterior_mean, run_inference};
use omc::metrics::{c2st, C2stConfig};
use omc::simulators::make_problem;
use omc::simulators::slcp::SLCP_TRUE_THETA;

fn main() {
    let with_distractors = std::env::args().any(|a| a == "--distractors");
    let id = if with_distractors { "slcp_dist" } else { "slcp" };

    let problem = make_problem(id, 5).unwrap();
    let mut cfg = ExperimentConfig::for_problem(id, 5).unwrap();
    cfg.master_seed = 4;
    println!(
        "{id}: N = {} observations, output dim {} per observation",
        problem.observations.len(),
        problem.observations[0].dim()
    );

    let out = run_inference(&problem, &cfg).unwrap();
    println!(
        "mask kept {}/{} dims; positive-weight fraction {:.3}; ESS {:.1}; {:.1}s",
        out.mask.active_count(),
        out.mask.len(),
        out.report.positive_weight_fraction,
        out.report.ess,
        out.report.runtime_seconds
    );

    let mean = posterior_mean(&out.samples);
    println!("generating theta  {SLCP_TRUE_THETA:+.2?}");
    println!(
        "posterior mean    [{:+.2}, {:+.2}, {:+.2}, {:+.2}, {:+.2}]  (scale signs unidentified)",
        mean[0], mean[1], mean[2], mean[3], mean[4]
    );
    let q3 = out.samples.iter().filter(|s| s[2] > 0.0).count() as f64 / out.samples.len() as f64;
    let q4 = out.samples.iter().filter(|s| s[3] > 0.0).count() as f64 / out.samples.len() as f64;
    println!("sign split theta3 {:.0}%/{:.0}%, theta4 {:.0}%/{:.0}%",
        100.0 * q3, 100.0 * (1.0 - q3), 100.0 * q4, 100.0 * (1.0 - q4));

    let oracle = oracle_samples(&problem, 5, out.samples.len(), 777, None).unwrap();
    let score = c2st(&out.samples, &oracle, &C2stConfig::with_seed(5)).unwrap();
    println!("C2ST vs the Metropolis reference: {:.3}", score.value);
}
