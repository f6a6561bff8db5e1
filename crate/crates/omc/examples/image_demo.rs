//! Image-based inference on the two 28×28 camera models; writes PGM files
//! for the observation, posterior mean, posterior spread and the analytic
//! mean oracle.
//!
//! Run with: `cargo run --release --example image_demo [out_dir]`
//! (the checkerboard pass takes a couple of minutes: its 784-dimensional
//! eigendecomposition runs once and is shared across all seeds)

use omc::harness::config::ExperimentConfig;
use omc::harness::image_demo::{image_demo, write_demo_images};
use omc::simulators::make_problem;
use std::path::PathBuf;

fn main() {
    let out_dir =
        PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "omc-images".to_string()));

    for id in ["img_pixel", "img_checker"] {
        let problem = make_problem(id, 784).unwrap();
        let cfg = ExperimentConfig::for_problem(id, 784).unwrap();
        let result = image_demo(&problem, &cfg).unwrap();
        write_demo_images(&out_dir, id, &result).unwrap();
        println!(
            "{id}: posterior mean vs analytic oracle MAE {:.4} ({} seeds, {:.1}s)",
            result.mean_absolute_error, cfg.seeds, result.report.runtime_seconds
        );
    }
    println!("PGM files in {}", out_dir.display());
}
