//! Minimize the frozen-noise distance functions of one problem.
//!
//! Each (observation, seed) pair yields a deterministic objective
//! d(θ) = ‖g(θ, u) − y°‖² over the informative output dimensions; Adam
//! drives each to its end point θ*. The end points of a well-behaved
//! problem are themselves posterior-shaped.
//!
//! Run with: `cargo run --release --example optimize_endpoints`

use omc::harness::config::ExperimentConfig;
use omc::optimize::{filter_seeds, run_optimizations, select_epsilon};
use omc::sensitivity::compute_mask;
use omc::simulators::make_problem;

fn main() {
    let problem = make_problem("mog_two", 2).unwrap();
    let cfg = ExperimentConfig::for_problem("mog_two", 2).unwrap();
    let sim = problem.sim();

    let mask = compute_mask(sim, 50, 50, cfg.mask.threshold, cfg.master_seed).unwrap();
    let records = run_optimizations(
        sim,
        &problem.observations,
        200,
        &mask,
        &cfg.optimizer,
        cfg.master_seed,
    )
    .unwrap();
    let records = filter_seeds(&records, 0.8);

    let accepted = records.iter().filter(|r| r.accepted).count();
    println!("{} records, {} accepted at pcg 0.8", records.len(), accepted);

    let mut distances: Vec<f64> = records.iter().map(|r| r.d_star).collect();
    distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "d* quantiles: min {:.2e}  median {:.2e}  max {:.2e}",
        distances[0],
        distances[distances.len() / 2],
        distances[distances.len() - 1]
    );

    let eps = select_epsilon(&records, &cfg.epsilon).unwrap();
    println!("epsilon for region construction: {eps:.3e}");

    // the two-mode structure shows up directly in the end points
    let upper = records.iter().filter(|r| r.theta_star[0] > 0.0).count();
    println!(
        "end points near +mu: {}, near -mu: {} (mode selectors frozen per seed)",
        upper,
        records.len() - upper
    );
    for r in records.iter().take(5) {
        println!(
            "  (n={}, i={}): theta* = [{:+.3}, {:+.3}], d* = {:.2e}, accepted = {}",
            r.obs_index, r.seed_index, r.theta_star[0], r.theta_star[1], r.d_star, r.accepted
        );
    }
}
