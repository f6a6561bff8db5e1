//! Full pipeline on the two-mode Gaussian benchmark, with and without
//! distractor dimensions, scored against the closed-form posterior.
//!
//! Run with: `cargo run --release --example infer_mog [dim]`

use omc::harness::config::ExperimentConfig;
use omc::harness::oracle_cache::oracle_samples;
use omc::harness::runner::{posterior_mean, posterior_std, run_inference};
use omc::metrics::{c2st, C2stConfig};
use omc::simulators::make_problem;

fn main() {
    let dim: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    for id in ["mog_two", "mog_two_dist"] {
        let problem = make_problem(id, dim).unwrap();
        let mut cfg = ExperimentConfig::for_problem(id, dim).unwrap();
        cfg.master_seed = 20;
        let out = run_inference(&problem, &cfg).unwrap();

        let mean = posterior_mean(&out.samples);
        let std = posterior_std(&out.samples);
        let plus = out.samples.iter().filter(|s| s[0] > 0.0).count() as f64
            / out.samples.len() as f64;
        println!("{id} (D={dim}):");
        println!(
            "  mask kept {}/{} dims; epsilon {:.3e}; ESS {:.1}",
            out.mask.active_count(),
            out.mask.len(),
            out.epsilon,
            out.report.ess
        );
        println!(
            "  posterior mean[0] {:+.3} std[0] {:.3}; mode split {:.0}% / {:.0}%",
            mean[0],
            std[0],
            100.0 * plus,
            100.0 * (1.0 - plus)
        );

        let oracle = oracle_samples(&problem, dim, out.samples.len(), 777, None).unwrap();
        let score = c2st(&out.samples, &oracle, &C2stConfig::with_seed(5)).unwrap();
        println!(
            "  C2ST vs closed-form posterior: {:.3} (0.5 indistinguishable)",
            score.value
        );
        println!(
            "  budget: {} vectorized calls, {} instance evaluations, {:.2}s",
            out.report.budget.vectorized_calls,
            out.report.budget.instance_evaluations,
            out.report.runtime_seconds
        );
    }
}
