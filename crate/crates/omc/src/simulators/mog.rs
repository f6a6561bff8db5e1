//! Gaussian location benchmark family.
//!
//! Four variants share one implementation: a unimodal shifted Gaussian
//! `y = θ + μ + σz`, a two-mode mixture `y = θ + sμ + σz` with the mode
//! selector `s ∈ {+1, −1}` frozen into the noise draw, and distractor
//! versions of both that append 18 θ-independent uniform coordinates.
//! Freezing `s` in the draw keeps the Jacobian an identity on the
//! informative block for every fixed `u`.

use crate::core::{
    standard_normal, unit_f64, DifferentiableSimulator, NoiseDraw, NoiseSpec, OutputVector,
    UniformPrior,
};
use crate::linalg::Mat;
use crate::simulators::{BenchmarkProblem, GroundTruth};
use rand::RngCore;
use std::sync::Arc;

pub const MOG_MU: f64 = 1.0;
pub const MOG_SIGMA: f64 = 0.2;
pub const N_DISTRACTORS: usize = 18;
pub const DISTRACTOR_BOUND: f64 = 3.0;
pub const PRIOR_BOUND: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MogVariant {
    Base,
    BaseDistractors,
    TwoModes,
    TwoModesDistractors,
}

impl MogVariant {
    pub fn bimodal(&self) -> bool {
        matches!(self, MogVariant::TwoModes | MogVariant::TwoModesDistractors)
    }

    pub fn with_distractors(&self) -> bool {
        matches!(self, MogVariant::BaseDistractors | MogVariant::TwoModesDistractors)
    }
}

#[derive(Clone, Debug)]
pub struct MogSimulator {
    dim: usize,
    variant: MogVariant,
    prior: UniformPrior,
    /// Distinguishes noise streams of problems sharing one master seed.
    pub noise_tag: u64,
}

impl MogSimulator {
    pub fn new(dim: usize, variant: MogVariant, noise_tag: u64) -> Self {
        assert!(dim >= 1);
        Self { dim, variant, prior: UniformPrior::symmetric(dim, PRIOR_BOUND), noise_tag }
    }

    pub fn variant(&self) -> MogVariant {
        self.variant
    }

    fn n_distractors(&self) -> usize {
        if self.variant.with_distractors() {
            N_DISTRACTORS
        } else {
            0
        }
    }
}

impl DifferentiableSimulator for MogSimulator {
    fn param_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim + self.n_distractors()
    }

    fn prior(&self) -> &UniformPrior {
        &self.prior
    }

    fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            gaussian: self.dim,
            selectors: if self.variant.bimodal() { 1 } else { 0 },
            uniforms: self.n_distractors(),
        }
    }

    fn sample_noise(&self, rng: &mut dyn RngCore) -> NoiseDraw {
        let gaussian = (0..self.dim).map(|_| standard_normal(rng)).collect();
        let selectors = if self.variant.bimodal() {
            vec![if unit_f64(rng) < 0.5 { 1 } else { -1 }]
        } else {
            vec![]
        };
        let uniforms = (0..self.n_distractors())
            .map(|_| DISTRACTOR_BOUND * (2.0 * unit_f64(rng) - 1.0))
            .collect();
        NoiseDraw::new(gaussian, selectors, uniforms)
    }

    fn simulate_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Vec<f64> {
        let s = if self.variant.bimodal() { noise.selectors()[0] as f64 } else { 1.0 };
        let mut y = Vec::with_capacity(self.output_dim());
        for k in 0..self.dim {
            y.push(theta[k] + s * MOG_MU + MOG_SIGMA * noise.gaussian()[k]);
        }
        y.extend_from_slice(noise.uniforms());
        y
    }

    fn jacobian_raw(&self, _theta: &[f64], _noise: &NoiseDraw) -> Mat {
        let mut j = Mat::zeros(self.output_dim(), self.dim);
        for k in 0..self.dim {
            j.set(k, k, 1.0);
        }
        j
    }
}

fn make(id: &str, dim: usize, variant: MogVariant) -> BenchmarkProblem {
    let sim = MogSimulator::new(dim, variant, 0);
    let observation =
        OutputVector::new(vec![0.0; sim.output_dim()]).expect("zero observation is finite");
    let ground_truth = if variant.bimodal() {
        GroundTruth::TruncatedGaussianMixture {
            means: vec![vec![MOG_MU; dim], vec![-MOG_MU; dim]],
            sigma: MOG_SIGMA,
        }
    } else {
        GroundTruth::TruncatedGaussian { mean: vec![-MOG_MU; dim], sigma: MOG_SIGMA }
    };
    BenchmarkProblem {
        id: id.to_string(),
        simulator: Arc::new(sim),
        observations: vec![observation],
        ground_truth,
    }
}

/// y ~ N(θ + μ, σ²I); y° = 0; posterior N(θ; −μ, σ²I) truncated to the prior box.
pub fn make_mog_base(dim: usize) -> BenchmarkProblem {
    make("mog_base", dim, MogVariant::Base)
}

/// Base simulator with 18 appended U(−3, 3) distractor coordinates; the
/// posterior is unchanged because distractors are θ-independent.
pub fn make_mog_base_distractors(dim: usize) -> BenchmarkProblem {
    make("mog_base_dist", dim, MogVariant::BaseDistractors)
}

/// y ~ ½ Σ_{s ∈ {±1}} N(θ + sμ, σ²I); the posterior is the symmetric
/// two-mode mixture truncated to the prior box.
pub fn make_mog_two(dim: usize) -> BenchmarkProblem {
    make("mog_two", dim, MogVariant::TwoModes)
}

pub fn make_mog_two_distractors(dim: usize) -> BenchmarkProblem {
    make("mog_two_dist", dim, MogVariant::TwoModesDistractors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{substream, StreamKind};

    #[test]
    fn output_dims_match_variant() {
        assert_eq!(MogSimulator::new(2, MogVariant::Base, 0).output_dim(), 2);
        assert_eq!(MogSimulator::new(2, MogVariant::BaseDistractors, 0).output_dim(), 20);
    }

    #[test]
    fn fixed_positive_selector_maps_zero_to_mu() {
        let sim = MogSimulator::new(2, MogVariant::TwoModes, 0);
        let u = NoiseDraw::new(vec![0.0, 0.0], vec![1], vec![]);
        assert_eq!(sim.simulate_raw(&[0.0, 0.0], &u), vec![MOG_MU, MOG_MU]);
    }

    #[test]
    fn distractor_coordinates_ignore_theta() {
        let sim = MogSimulator::new(2, MogVariant::BaseDistractors, 0);
        let mut rng = substream(1, StreamKind::Noise, 0, 0);
        let u = sim.sample_noise(&mut rng);
        let a = sim.simulate_raw(&[0.0, 0.0], &u);
        let b = sim.simulate_raw(&[2.5, -1.5], &u);
        assert_eq!(a[2..], b[2..]);
    }

    #[test]
    fn selector_frequencies_are_balanced() {
        let sim = MogSimulator::new(1, MogVariant::TwoModes, 0);
        let mut rng = substream(2, StreamKind::Noise, 0, 0);
        let n = 4000;
        let pos = (0..n)
            .filter(|_| sim.sample_noise(&mut rng).selectors()[0] == 1)
            .count();
        let frac = pos as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.03, "mode selector should be fair, got {frac}");
    }
}
