//! Image-based inference: noisy camera models on 28×28 grayscale images.
//!
//! Two linear cameras over the pixel prior U(0, 1)^784:
//!   * pixel-wise intensity, y = aθ + b + ε — the per-pixel posterior is a
//!     truncated Gaussian in closed form;
//!   * edge filtering, y = K ∗ θ + ε with a 3×3 checkerboard kernel of
//!     alternating ±1 (top-left +1), stride 1, zero padding — the
//!     least-squares inverse clipped to [0, 1] serves as the mean oracle.
//!
//! Both use Gaussian pixel noise ε ~ N(0, σ²I). Observations come from a
//! built-in digit image; real digits can be substituted through the IDX
//! reader in [`super::io`].

use crate::core::{
    standard_normal, DifferentiableSimulator, NoiseDraw, NoiseSpec, OutputVector, UniformPrior,
};
use crate::error::{Error, Result};
use crate::linalg::{solve, Mat};
use crate::simulators::{BenchmarkProblem, GroundTruth};
use crate::streams::{substream, StreamKind};
use rand::RngCore;
use std::sync::Arc;

pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_DIM: usize = IMAGE_SIDE * IMAGE_SIDE;

pub const DEFAULT_GAIN: f64 = 0.8;
pub const DEFAULT_OFFSET: f64 = 0.1;
pub const DEFAULT_PIXEL_NOISE: f64 = 0.1;
/// The checkerboard kernel nearly annihilates period-six oscillations
/// (its smallest 1-D symbol value is ≈ 0.06), so observation noise is
/// amplified ~15× per pixel through the inverse. The demo noise level keeps
/// the inverse problem's per-pixel posterior spread well under the prior
/// box scale, which is where a clipped least-squares mean is a meaningful
/// reference.
pub const DEFAULT_CHECKER_NOISE: f64 = 0.005;

const OBSERVATION_SEED: u64 = 0x11a6e_0b5;

/// y = aθ + b + σz per pixel.
#[derive(Clone, Debug)]
pub struct PixelwiseCamera {
    pub gain: f64,
    pub offset: f64,
    pub noise: f64,
    prior: UniformPrior,
}

impl PixelwiseCamera {
    pub fn new(gain: f64, offset: f64, noise: f64) -> Self {
        assert!(gain != 0.0, "pixel-wise camera needs a nonzero gain");
        assert!(noise > 0.0);
        Self { gain, offset, noise, prior: UniformPrior::new(vec![0.0; IMAGE_DIM], vec![1.0; IMAGE_DIM]).expect("unit box") }
    }
}

impl DifferentiableSimulator for PixelwiseCamera {
    fn param_dim(&self) -> usize {
        IMAGE_DIM
    }

    fn output_dim(&self) -> usize {
        IMAGE_DIM
    }

    fn prior(&self) -> &UniformPrior {
        &self.prior
    }

    fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec { gaussian: IMAGE_DIM, selectors: 0, uniforms: 0 }
    }

    fn sample_noise(&self, rng: &mut dyn RngCore) -> NoiseDraw {
        NoiseDraw::new((0..IMAGE_DIM).map(|_| standard_normal(rng)).collect(), vec![], vec![])
    }

    fn simulate_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Vec<f64> {
        theta
            .iter()
            .zip(noise.gaussian())
            .map(|(t, z)| self.gain * t + self.offset + self.noise * z)
            .collect()
    }

    fn jacobian_raw(&self, _theta: &[f64], _noise: &NoiseDraw) -> Mat {
        let mut j = Mat::zeros(IMAGE_DIM, IMAGE_DIM);
        for k in 0..IMAGE_DIM {
            j.set(k, k, self.gain);
        }
        j
    }

    fn apply_jacobian_transpose(&self, _theta: &[f64], _noise: &NoiseDraw, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| self.gain * x).collect()
    }
}

/// 3×3 checkerboard kernel: +1 where the offset sum is even.
#[inline]
fn kernel(di: isize, dj: isize) -> f64 {
    if (di + dj).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// K ∗ x with zero padding, preserving the 28×28 size.
pub fn checkerboard_convolve(x: &[f64]) -> Vec<f64> {
    let n = IMAGE_SIDE as isize;
    let mut y = vec![0.0; IMAGE_DIM];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= 0 && ii < n && jj >= 0 && jj < n {
                        acc += kernel(di, dj) * x[(ii * n + jj) as usize];
                    }
                }
            }
            y[(i * n + j) as usize] = acc;
        }
    }
    y
}

/// y = K ∗ θ + σz. The kernel is symmetric under negation of both offsets,
/// so the convolution operator is its own transpose.
#[derive(Clone, Debug)]
pub struct CheckerboardCamera {
    pub noise: f64,
    prior: UniformPrior,
}

impl CheckerboardCamera {
    pub fn new(noise: f64) -> Self {
        assert!(noise > 0.0);
        Self { noise, prior: UniformPrior::new(vec![0.0; IMAGE_DIM], vec![1.0; IMAGE_DIM]).expect("unit box") }
    }

    /// Dense 784×784 convolution operator.
    pub fn operator() -> Mat {
        let n = IMAGE_SIDE as isize;
        let mut a = Mat::zeros(IMAGE_DIM, IMAGE_DIM);
        for i in 0..n {
            for j in 0..n {
                let row = (i * n + j) as usize;
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let (ii, jj) = (i + di, j + dj);
                        if ii >= 0 && ii < n && jj >= 0 && jj < n {
                            a.set(row, (ii * n + jj) as usize, kernel(di, dj));
                        }
                    }
                }
            }
        }
        a
    }
}

impl DifferentiableSimulator for CheckerboardCamera {
    fn param_dim(&self) -> usize {
        IMAGE_DIM
    }

    fn output_dim(&self) -> usize {
        IMAGE_DIM
    }

    fn prior(&self) -> &UniformPrior {
        &self.prior
    }

    fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec { gaussian: IMAGE_DIM, selectors: 0, uniforms: 0 }
    }

    fn sample_noise(&self, rng: &mut dyn RngCore) -> NoiseDraw {
        NoiseDraw::new((0..IMAGE_DIM).map(|_| standard_normal(rng)).collect(), vec![], vec![])
    }

    fn simulate_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Vec<f64> {
        let mut y = checkerboard_convolve(theta);
        for (yk, z) in y.iter_mut().zip(noise.gaussian()) {
            *yk += self.noise * z;
        }
        y
    }

    fn jacobian_raw(&self, _theta: &[f64], _noise: &NoiseDraw) -> Mat {
        Self::operator()
    }

    fn apply_jacobian_transpose(&self, _theta: &[f64], _noise: &NoiseDraw, v: &[f64]) -> Vec<f64> {
        checkerboard_convolve(v)
    }
}

const DIGIT_ART: [&str; 28] = [
    "............................",
    "............................",
    "............................",
    "....##################......",
    "....##################......",
    "....................##......",
    "...................##.......",
    "..................##........",
    ".................##.........",
    ".................##.........",
    "................##..........",
    "...............##...........",
    "......#####...##............",
    "......#####...##............",
    "..............##............",
    ".............##.............",
    ".............##.............",
    "............##..............",
    "............##..............",
    "...........##...............",
    "...........##...............",
    "..........##................",
    "..........##................",
    ".........##.................",
    ".........##.................",
    "............................",
    "............................",
    "............................",
];

/// Built-in 28×28 digit, lightly smoothed into [0, 1].
pub fn builtin_digit() -> Vec<f64> {
    let mut raw = vec![0.0f64; IMAGE_DIM];
    for (i, row) in DIGIT_ART.iter().enumerate() {
        for (j, ch) in row.chars().enumerate() {
            if ch == '#' {
                raw[i * IMAGE_SIDE + j] = 1.0;
            }
        }
    }
    // one 3×3 box-blur pass softens the strokes
    let n = IMAGE_SIDE as isize;
    let mut out = vec![0.0f64; IMAGE_DIM];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= 0 && ii < n && jj >= 0 && jj < n {
                        acc += raw[(ii * n + jj) as usize];
                        cnt += 1.0;
                    }
                }
            }
            out[(i * n + j) as usize] = acc / cnt;
        }
    }
    out
}

/// The clean image behind the pixel-wise observation.
pub fn pixelwise_true_image() -> Vec<f64> {
    builtin_digit()
}

/// The clean image behind the checkerboard observation. It is pulled toward
/// mid-gray because the near-null kernel directions leave the data unable to
/// pin pixels near the prior faces.
pub fn checkerboard_true_image() -> Vec<f64> {
    builtin_digit().iter().map(|v| 0.3 + 0.4 * v).collect()
}

fn observe(sim: &dyn DifferentiableSimulator, truth: &[f64], tag: u64) -> OutputVector {
    let mut rng = substream(OBSERVATION_SEED, StreamKind::Observation, tag, 0);
    let u = sim.sample_noise(&mut rng);
    OutputVector::new(sim.simulate_raw(truth, &u)).expect("finite observation")
}

/// Pixel-wise camera problem; the ground truth is the factorized per-pixel
/// truncated Gaussian N((y−b)/a, (σ/a)²) on [0, 1].
pub fn make_image_pixelwise(gain: f64, offset: f64, noise: f64) -> BenchmarkProblem {
    let sim = PixelwiseCamera::new(gain, offset, noise);
    let observation = observe(&sim, &pixelwise_true_image(), 0);
    let mu = observation.values().iter().map(|y| (y - offset) / gain).collect();
    BenchmarkProblem {
        id: "img_pixel".to_string(),
        simulator: Arc::new(sim),
        observations: vec![observation],
        ground_truth: GroundTruth::PerPixelTruncatedGaussian { mu, sigma: noise / gain.abs() },
    }
}

/// Checkerboard camera problem; the mean oracle is the least-squares
/// solution of the (square, invertible) convolution system clipped to [0, 1].
pub fn make_image_checkerboard(noise: f64) -> BenchmarkProblem {
    let sim = CheckerboardCamera::new(noise);
    let observation = observe(&sim, &checkerboard_true_image(), 1);
    let ls = solve(&CheckerboardCamera::operator(), observation.values())
        .expect("checkerboard operator is invertible");
    let mean = ls.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    BenchmarkProblem {
        id: "img_checker".to_string(),
        simulator: Arc::new(sim),
        observations: vec![observation],
        ground_truth: GroundTruth::LeastSquaresClipped { mean },
    }
}

/// Analytic mean of N(mu, sigma²) truncated to [0, 1], per pixel.
pub fn truncated_gaussian_mean_image(mu: &[f64], sigma: f64) -> Vec<f64> {
    mu.iter().map(|&m| crate::simulators::oracles::truncated_gaussian_mean(m, sigma, 0.0, 1.0)).collect()
}

/// Mean image of a problem's oracle, for the demo comparisons.
pub fn oracle_mean_image(problem: &BenchmarkProblem) -> Result<Vec<f64>> {
    match &problem.ground_truth {
        GroundTruth::PerPixelTruncatedGaussian { mu, sigma } => {
            Ok(truncated_gaussian_mean_image(mu, *sigma))
        }
        GroundTruth::LeastSquaresClipped { mean } => Ok(mean.clone()),
        _ => Err(Error::OracleUnavailable(problem.id.clone())),
    }
}
