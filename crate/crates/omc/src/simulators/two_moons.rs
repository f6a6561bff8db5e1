//! Crescent-shaped bimodal benchmark.
//!
//! y = (r cos α + 0.25, r sin α) + (−|θ₁ + θ₂|/√2, (−θ₁ + θ₂)/√2) with
//! r ~ N(0.1, 0.01²) and α ~ U(−π/2, π/2), prior θ ~ U(−1, 1)². The
//! simulator is invariant under (θ₁, θ₂) → (−θ₂, −θ₁), so the posterior
//! always carries two reflected crescent modes; sign(θ₁ + θ₂) labels them.
//! The |θ₁ + θ₂| kink uses the subgradient convention sign(0) = 0.

use crate::core::{
    standard_normal, unit_f64, DifferentiableSimulator, NoiseDraw, NoiseSpec, OutputVector,
    UniformPrior,
};
use crate::linalg::Mat;
use crate::simulators::{BenchmarkProblem, GroundTruth};
use rand::RngCore;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::sync::Arc;

pub const RADIUS_MEAN: f64 = 0.1;
pub const RADIUS_STD: f64 = 0.01;
pub const CRESCENT_OFFSET: f64 = 0.25;

/// Tolerance of the rejection-ABC reference posterior; the run defaults use
/// the same value so both sides approximate the same smoothed posterior.
pub const ABC_EPSILON: f64 = 1e-3;
pub const ABC_DRAWS: usize = 20_000_000;

#[derive(Clone, Debug)]
pub struct TwoMoonsSimulator {
    prior: UniformPrior,
}

impl TwoMoonsSimulator {
    pub fn new() -> Self {
        Self { prior: UniformPrior::symmetric(2, 1.0) }
    }
}

impl Default for TwoMoonsSimulator {
    fn default() -> Self {
        Self::new()
    }
}

impl DifferentiableSimulator for TwoMoonsSimulator {
    fn param_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        2
    }

    fn prior(&self) -> &UniformPrior {
        &self.prior
    }

    fn noise_spec(&self) -> NoiseSpec {
        // one Gaussian innovation for r, one uniform for the angle α
        NoiseSpec { gaussian: 1, selectors: 0, uniforms: 1 }
    }

    fn sample_noise(&self, rng: &mut dyn RngCore) -> NoiseDraw {
        let r_innovation = standard_normal(rng);
        let alpha = FRAC_PI_2 * (2.0 * unit_f64(rng) - 1.0);
        NoiseDraw::new(vec![r_innovation], vec![], vec![alpha])
    }

    fn simulate_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Vec<f64> {
        let r = RADIUS_MEAN + RADIUS_STD * noise.gaussian()[0];
        let alpha = noise.uniforms()[0];
        vec![
            r * alpha.cos() + CRESCENT_OFFSET - (theta[0] + theta[1]).abs() * FRAC_1_SQRT_2,
            r * alpha.sin() + (-theta[0] + theta[1]) * FRAC_1_SQRT_2,
        ]
    }

    fn jacobian_raw(&self, theta: &[f64], _noise: &NoiseDraw) -> Mat {
        let s = theta[0] + theta[1];
        let sign = if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        };
        Mat::from_rows(&[
            vec![-sign * FRAC_1_SQRT_2, -sign * FRAC_1_SQRT_2],
            vec![-FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        ])
    }
}

/// Two-moons problem with observation y° = (0, 0) and a rejection-ABC
/// reference posterior at a tight tolerance.
pub fn make_two_moons() -> BenchmarkProblem {
    BenchmarkProblem {
        id: "two_moons".to_string(),
        simulator: Arc::new(TwoMoonsSimulator::new()),
        observations: vec![OutputVector::new(vec![0.0, 0.0]).expect("finite")],
        ground_truth: GroundTruth::AbcReference { epsilon: ABC_EPSILON, draws: ABC_DRAWS },
    }
}
