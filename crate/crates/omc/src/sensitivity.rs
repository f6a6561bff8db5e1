//! Distractor detection via expected gradient norms.
//!
//! An output dimension whose gradient with respect to θ vanishes everywhere
//! carries no information about the parameters. We estimate the expected
//! Euclidean norm of each Jacobian row over (θ ~ prior, u ~ p(u)) and keep
//! the dimensions whose estimate exceeds the threshold τ. This never looks
//! at observed data, so the mask can be computed before any observation
//! arrives.

use crate::core::{jacobian, DifferentiableSimulator, NoiseDraw, ParamVector};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::streams::{substream, StreamKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Active/inactive flags per output dimension plus the gradient-norm
/// estimates they were derived from. Invariant: `active[k] == (estimates[k] > threshold)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    active: Vec<bool>,
    threshold: f64,
    estimates: Vec<f64>,
}

impl Mask {
    pub fn from_estimates(estimates: Vec<f64>, threshold: f64) -> Self {
        let active = estimates.iter().map(|e| *e > threshold).collect();
        Self { active, threshold, estimates }
    }

    /// All dimensions active; estimates are a formal 1.0 per dimension.
    pub fn full(dim: usize) -> Self {
        Self { active: vec![true; dim], threshold: 0.0, estimates: vec![1.0; dim] }
    }

    /// Build directly from flags (tests and hand-constructed cases).
    pub fn from_active(active: Vec<bool>) -> Self {
        let estimates = active.iter().map(|a| if *a { 1.0 } else { 0.0 }).collect();
        Self { active, threshold: 0.5, estimates }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn any_active(&self) -> bool {
        self.active.iter().any(|a| *a)
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }
}

/// Default number of θ and u samples for the gradient-norm estimate.
pub const DEFAULT_SENSITIVITY_SAMPLES: usize = 50;

/// Default threshold: machine epsilon, i.e. anything measurably nonzero.
pub const DEFAULT_THRESHOLD: f64 = f64::EPSILON;

/// Estimate E‖∇_θ g_k‖ per output dimension and threshold at τ.
///
/// `estimates[k]` is the mean over `n_theta × n_noise` (θ_j, u_l) pairs of
/// the Euclidean norm of Jacobian row k. Jacobians may be evaluated in
/// parallel; the reduction runs in fixed index order so the result does not
/// depend on scheduling. Fails with [`Error::NoInformativeDimensions`] when
/// every dimension falls at or below τ.
pub fn compute_mask(
    sim: &dyn DifferentiableSimulator,
    n_theta: usize,
    n_noise: usize,
    threshold: f64,
    master_seed: u64,
) -> Result<Mask> {
    assert!(n_theta >= 1 && n_noise >= 1, "need at least one sample each");
    assert!(threshold >= 0.0, "threshold must be nonnegative");

    let thetas: Vec<ParamVector> = {
        let mut rng = substream(master_seed, StreamKind::Mask, 0, 0);
        (0..n_theta).map(|_| sim.prior().sample(&mut rng)).collect()
    };
    let noises: Vec<NoiseDraw> = {
        let mut rng = substream(master_seed, StreamKind::Mask, 1, 0);
        (0..n_noise).map(|_| sim.sample_noise(&mut rng)).collect()
    };

    let dy = sim.output_dim();
    let pairs: Vec<(usize, usize)> =
        (0..n_theta).flat_map(|j| (0..n_noise).map(move |l| (j, l))).collect();

    let per_pair: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(j, l)| {
            let jac = jacobian(sim, &thetas[j], &noises[l]).expect("schema-valid inputs");
            (0..dy).map(|k| norm2(jac.row(k))).collect()
        })
        .collect();

    let mut estimates = vec![0.0; dy];
    for row_norms in &per_pair {
        for k in 0..dy {
            estimates[k] += row_norms[k];
        }
    }
    let count = (n_theta * n_noise) as f64;
    for e in &mut estimates {
        *e /= count;
    }

    let mask = Mask::from_estimates(estimates, threshold);
    if !mask.any_active() {
        return Err(Error::NoInformativeDimensions);
    }
    Ok(mask)
}
