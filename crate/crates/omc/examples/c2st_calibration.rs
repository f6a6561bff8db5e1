//! Calibration of the classifier two-sample test: identical distributions
//! should score near 0.5, and a unit mean gap between 1-D Gaussians should
//! land near the optimal accuracy Φ(1/2) ≈ 0.691.
//!
//! Run with: `cargo run --release --example c2st_calibration`

use omc::core::{standard_normal, ParamVector};
use omc::metrics::{c2st, C2stConfig};
use omc::streams::{substream, StreamKind};

fn gaussian_set(n: usize, shift: f64, tag: u64) -> Vec<ParamVector> {
    let mut rng = substream(900 + tag, StreamKind::Classifier, 0, 0);
    (0..n)
        .map(|_| ParamVector::new(vec![shift + standard_normal(&mut rng)]).unwrap())
        .collect()
}

fn main() {
    let reps = 10;
    let mut null_scores = Vec::new();
    for r in 0..reps {
        let x = gaussian_set(1000, 0.0, 2 * r);
        let y = gaussian_set(1000, 0.0, 2 * r + 1);
        let s = c2st(&x, &y, &C2stConfig::with_seed(r)).unwrap();
        null_scores.push(s.value);
    }
    let mean_null = null_scores.iter().sum::<f64>() / reps as f64;
    println!("null (same distribution), {reps} repetitions: mean {mean_null:.3}");

    for gap in [0.5, 1.0, 2.0, 4.0] {
        let x = gaussian_set(1000, 0.0, 100);
        let y = gaussian_set(1000, gap, 101);
        let s = c2st(&x, &y, &C2stConfig::with_seed(3)).unwrap();
        let bayes = 0.5 * (1.0 + libm_erf(gap / (2.0 * std::f64::consts::SQRT_2)));
        println!(
            "gap {gap:.1}: score {:.3} (per-fold {:?}), optimal accuracy {bayes:.3}",
            s.value,
            s.per_fold.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        );
    }
}

// erf via the same approximation the oracle helpers use
fn libm_erf(x: f64) -> f64 {
    2.0 * omc::simulators::oracles::normal_cdf(x * std::f64::consts::SQRT_2) - 1.0
}
