//! Crescent-shaped bimodal posterior, scored against a rejection-ABC
//! reference at the same tolerance.
//!
//! Run with: `cargo run --release --example infer_two_moons`

use omc::harness::config::ExperimentConfig;
use omc::harness::oracle_cache::oracle_samples;
use omc::harness::runner::run_inference;
use omc::metrics::{c2st, C2stConfig};
use omc::simulators::make_problem;

fn main() {
    let problem = make_problem("two_moons", 2).unwrap();
    let mut cfg = ExperimentConfig::for_problem("two_moons", 2).unwrap();
    cfg.master_seed = 8;
    let out = run_inference(&problem, &cfg).unwrap();

    let plus =
        out.samples.iter().filter(|s| s[0] + s[1] > 0.0).count() as f64 / out.samples.len() as f64;
    println!(
        "two_moons: {} samples, ESS {:.1}, crescent split {:.0}% / {:.0}%",
        out.samples.len(),
        out.report.ess,
        100.0 * plus,
        100.0 * (1.0 - plus)
    );

    // coarse ascii rendering of the two crescents
    let mut grid = [[0u32; 36]; 18];
    for s in &out.samples {
        let col = (((s[0] + 1.0) / 2.0) * 35.0).round().clamp(0.0, 35.0) as usize;
        let row = (((1.0 - s[1]) / 2.0) * 17.0).round().clamp(0.0, 17.0) as usize;
        grid[row][col] += 1;
    }
    for row in grid {
        let line: String = row
            .iter()
            .map(|c| match c {
                0 => ' ',
                1..=2 => '.',
                3..=6 => 'o',
                _ => '#',
            })
            .collect();
        println!("  |{line}|");
    }

    let oracle = oracle_samples(&problem, 2, out.samples.len(), 777, None).unwrap();
    let score = c2st(&out.samples, &oracle, &C2stConfig::with_seed(5)).unwrap();
    println!("C2ST vs rejection-ABC reference: {:.3}", score.value);
}
