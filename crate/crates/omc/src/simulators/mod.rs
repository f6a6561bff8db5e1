//! Benchmark problems: simulators, priors, observations and ground-truth
//! posterior oracles, addressable by string id.

pub mod image;
pub mod io;
pub mod mog;
pub mod oracles;
pub mod slcp;
pub mod two_moons;

use crate::core::{DifferentiableSimulator, OutputVector, ParamVector};
use crate::error::{Error, Result};
use rand::RngCore;
use std::sync::Arc;

/// How ground-truth posterior samples are obtained for a problem.
#[derive(Clone, Debug)]
pub enum GroundTruth {
    /// Rejection from an untruncated Gaussian against the prior box.
    TruncatedGaussian { mean: Vec<f64>, sigma: f64 },
    /// Equal-weight mixture of symmetric Gaussians, truncated to the prior.
    TruncatedGaussianMixture { means: Vec<Vec<f64>>, sigma: f64 },
    /// Random-walk Metropolis on a tractable likelihood.
    McmcReference,
    /// Rejection ABC on the problem's own simulator at a tight tolerance.
    AbcReference { epsilon: f64, draws: usize },
    /// Factorized per-pixel truncated Gaussians (pixel-wise camera).
    PerPixelTruncatedGaussian { mu: Vec<f64>, sigma: f64 },
    /// Mean/std oracle only: least-squares solution clipped to the prior.
    LeastSquaresClipped { mean: Vec<f64> },
    None,
}

/// A benchmark problem: simulator, observations and its ground-truth oracle.
#[derive(Clone)]
pub struct BenchmarkProblem {
    pub id: String,
    pub simulator: Arc<dyn DifferentiableSimulator>,
    pub observations: Vec<OutputVector>,
    pub ground_truth: GroundTruth,
}

impl BenchmarkProblem {
    pub fn sim(&self) -> &dyn DifferentiableSimulator {
        self.simulator.as_ref()
    }

    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }
}

/// All problem ids the harness can address.
pub const PROBLEM_IDS: [&str; 9] = [
    "mog_base",
    "mog_base_dist",
    "mog_two",
    "mog_two_dist",
    "slcp",
    "slcp_dist",
    "two_moons",
    "img_pixel",
    "img_checker",
];

/// Instantiate a problem by id. `dim` applies to the Gaussian-location
/// family and is ignored elsewhere.
pub fn make_problem(id: &str, dim: usize) -> Result<BenchmarkProblem> {
    match id {
        "mog_base" => Ok(mog::make_mog_base(dim)),
        "mog_base_dist" => Ok(mog::make_mog_base_distractors(dim)),
        "mog_two" => Ok(mog::make_mog_two(dim)),
        "mog_two_dist" => Ok(mog::make_mog_two_distractors(dim)),
        "slcp" => Ok(slcp::make_slcp()),
        "slcp_dist" => Ok(slcp::make_slcp_distractors()),
        "two_moons" => Ok(two_moons::make_two_moons()),
        "img_pixel" => Ok(image::make_image_pixelwise(
            image::DEFAULT_GAIN,
            image::DEFAULT_OFFSET,
            image::DEFAULT_PIXEL_NOISE,
        )),
        "img_checker" => Ok(image::make_image_checkerboard(image::DEFAULT_CHECKER_NOISE)),
        other => Err(Error::Config(format!(
            "unknown problem id '{other}' (known: {})",
            PROBLEM_IDS.join(", ")
        ))),
    }
}

/// Draw ground-truth posterior samples for a problem.
pub fn ground_truth_samples(
    problem: &BenchmarkProblem,
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<ParamVector>> {
    oracles::sample_ground_truth(problem, count, rng)
}
