//! Mixture proposal over accepted hyperboxes and importance weighting.
//!
//! Candidates are drawn from an equal-weight mixture of the per-(observation,
//! seed) box distributions. Each candidate θ_p is then weighted by
//! `p(θ_p)/q(θ_p) · ∏_n (# accepted seeds i with d_i^n(θ_p) ≤ ε)`, where the
//! per-seed distances are recomputed by direct simulation — the boxes only
//! ever serve as proposals, never as the acceptance test itself. A candidate
//! must land within ε of at least one accepted seed for every observation to
//! keep a positive weight.

use crate::core::{
    masked_sq_distance, unit_f64, DifferentiableSimulator, NoiseDraw, OutputVector, ParamVector,
    UniformPrior,
};
use crate::error::{Error, Result};
use crate::regions::{sample_box, Hyperbox};
use crate::sensitivity::Mask;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One mixture component: a hyperbox tagged with its (observation, seed) origin.
#[derive(Clone, Debug)]
pub struct ProposalComponent {
    pub hyperbox: Hyperbox,
    pub obs_index: usize,
    pub seed_index: usize,
}

/// Equal-weight mixture of uniform box distributions. Components sharing an
/// axis frame are grouped so density evaluation projects a point into each
/// distinct frame once and tests the member boxes in O(D) each.
#[derive(Clone, Debug)]
pub struct ProposalMixture {
    components: Vec<ProposalComponent>,
    frame_groups: Vec<(std::sync::Arc<crate::regions::AxisFrame>, Vec<usize>)>,
}

impl ProposalMixture {
    pub fn components(&self) -> &[ProposalComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Weight of each component: 1 / component count. When seed filtering
    /// reduced the component set, the mixture renormalizes over what is
    /// actually present.
    pub fn component_weight(&self) -> f64 {
        1.0 / self.components.len() as f64
    }
}

/// Assemble the mixture over accepted boxes.
pub fn build_proposal(components: Vec<ProposalComponent>) -> Result<ProposalMixture> {
    if components.is_empty() {
        return Err(Error::EmptyProposal);
    }
    let d = components[0].hyperbox.dim();
    if components.iter().any(|c| c.hyperbox.dim() != d) {
        return Err(Error::Schema("mixture components disagree on dimension".into()));
    }
    let mut frame_groups: Vec<(std::sync::Arc<crate::regions::AxisFrame>, Vec<usize>)> =
        Vec::new();
    for (idx, c) in components.iter().enumerate() {
        let frame = c.hyperbox.frame();
        match frame_groups.iter_mut().find(|(f, _)| std::sync::Arc::ptr_eq(f, frame)) {
            Some((_, members)) => members.push(idx),
            None => frame_groups.push((frame.clone(), vec![idx])),
        }
    }
    Ok(ProposalMixture { components, frame_groups })
}

/// Mixture density: average of component box densities; zero off the union.
pub fn proposal_density(mix: &ProposalMixture, theta: &[f64]) -> f64 {
    log_proposal_density(mix, theta).exp()
}

/// Log mixture density via log-sum-exp over the boxes containing θ; −∞ off
/// the union. High-dimensional box volumes underflow plain f64, so all
/// weighting runs through this.
pub fn log_proposal_density(mix: &ProposalMixture, theta: &[f64]) -> f64 {
    let log_w = -(mix.components.len() as f64).ln();
    let mut terms: Vec<f64> = Vec::new();
    for (frame, members) in &mix.frame_groups {
        let coords = frame.to_frame(theta);
        for &idx in members {
            let b = &mix.components[idx].hyperbox;
            if b.contains_frame_coords(&coords) {
                terms.push(-b.log_volume());
            }
        }
    }
    if terms.is_empty() {
        return f64::NEG_INFINITY;
    }
    let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    log_w + peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln()
}

/// Draw P candidates: component uniformly at random, then uniform in its box.
pub fn sample_proposal(
    mix: &ProposalMixture,
    candidates: usize,
    rng: &mut dyn RngCore,
) -> Vec<ParamVector> {
    assert!(candidates >= 1, "candidate count must be at least 1");
    let k = mix.components.len();
    (0..candidates)
        .map(|_| {
            let c = ((unit_f64(rng) * k as f64) as usize).min(k - 1);
            sample_box(&mix.components[c].hyperbox, rng)
        })
        .collect()
}

/// An accepted (observation, seed) pair with its frozen noise draw.
pub struct AcceptedRegion {
    pub obs_index: usize,
    pub seed_index: usize,
    pub noise: NoiseDraw,
}

/// Per-observation counts Σ_i 1{d(g(θ, u_{i,n}), y°_n) ≤ ε} over the
/// accepted seeds, evaluated by direct simulation.
pub fn region_counts(
    sim: &dyn DifferentiableSimulator,
    theta: &[f64],
    regions: &[AcceptedRegion],
    observations: &[OutputVector],
    epsilon: f64,
    mask: &Mask,
) -> Vec<u32> {
    debug_assert!(epsilon > 0.0);
    let mut counts = vec![0u32; observations.len()];
    for r in regions {
        let y = sim.simulate_raw(theta, &r.noise);
        let d = masked_sq_distance(&y, observations[r.obs_index].values(), mask.active());
        if d <= epsilon {
            counts[r.obs_index] += 1;
        }
    }
    counts
}

/// `region_counts` for a whole candidate batch; parallel over candidates
/// with results in candidate order.
pub fn region_counts_batch(
    sim: &dyn DifferentiableSimulator,
    thetas: &[ParamVector],
    regions: &[AcceptedRegion],
    observations: &[OutputVector],
    epsilon: f64,
    mask: &Mask,
) -> Vec<Vec<u32>> {
    thetas
        .par_iter()
        .map(|t| region_counts(sim, t.values(), regions, observations, epsilon, mask))
        .collect()
}

/// A proposal draw with everything entering its importance weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub theta: Vec<f64>,
    pub proposal_density: f64,
    pub prior_density: f64,
    pub region_counts: Vec<u32>,
    pub weight: f64,
}

/// Weight each candidate: w = (p/q) · ∏_n counts_n. Samples outside the
/// prior support get weight zero; a zero proposal density at a drawn sample
/// is an internal inconsistency and aborts.
///
/// Weights are computed in log space. When every log-weight fits the normal
/// f64 range the stored weights equal p/q · ∏counts exactly; otherwise they
/// are reported up to one common positive factor (the maximal weight
/// becomes 1), which every downstream use — resampling, self-normalized
/// expectations, effective sample size — is invariant to.
pub fn compute_weights(
    samples: &[ParamVector],
    prior: &UniformPrior,
    mix: &ProposalMixture,
    counts: &[Vec<u32>],
) -> Result<Vec<WeightedSample>> {
    assert_eq!(samples.len(), counts.len());
    let mut log_weights = Vec::with_capacity(samples.len());
    let mut log_qs = Vec::with_capacity(samples.len());
    for (theta, c) in samples.iter().zip(counts) {
        let log_q = log_proposal_density(mix, theta.values());
        if log_q == f64::NEG_INFINITY {
            return Err(Error::InconsistentProposal);
        }
        let log_p = prior.log_density(theta.values());
        let log_counts: f64 = c.iter().map(|k| (*k as f64).ln()).sum();
        log_weights.push(log_p - log_q + log_counts);
        log_qs.push(log_q);
    }
    let peak = log_weights.iter().cloned().filter(|w| w.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    // stay literal when exact; shift by the peak only when f64 cannot hold it
    let shift = if peak.is_finite() && peak.abs() < 600.0 { 0.0 } else { peak };

    let mut out = Vec::with_capacity(samples.len());
    for ((theta, c), (log_w, log_q)) in
        samples.iter().zip(counts).zip(log_weights.iter().zip(&log_qs))
    {
        let weight = if log_w.is_finite() { (log_w - shift).exp() } else { 0.0 };
        out.push(WeightedSample {
            theta: theta.values().to_vec(),
            proposal_density: log_q.exp(),
            prior_density: prior.density(theta.values()),
            region_counts: c.clone(),
            weight,
        });
    }
    Ok(out)
}

/// Multinomial resampling with replacement, probability ∝ weight.
pub fn resample(
    weighted: &[WeightedSample],
    final_count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<ParamVector>> {
    assert!(final_count >= 1);
    let total: f64 = weighted.iter().map(|w| w.weight).sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let mut cumulative = Vec::with_capacity(weighted.len());
    let mut acc = 0.0;
    for w in weighted {
        acc += w.weight;
        cumulative.push(acc);
    }
    let out = (0..final_count)
        .map(|_| {
            let target = unit_f64(rng) * total;
            let idx = match cumulative
                .binary_search_by(|probe| probe.partial_cmp(&target).unwrap())
            {
                Ok(i) => i + 1,
                Err(i) => i,
            }
            .min(weighted.len() - 1);
            ParamVector::new(weighted[idx].theta.clone()).expect("stored sample is finite")
        })
        .collect();
    Ok(out)
}

/// Self-normalized weighted average Σ w h(θ) / Σ w.
pub fn posterior_expectation(
    weighted: &[WeightedSample],
    h: &dyn Fn(&[f64]) -> f64,
) -> Result<f64> {
    let total: f64 = weighted.iter().map(|w| w.weight).sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroWeights);
    }
    Ok(weighted.iter().map(|w| w.weight * h(&w.theta)).sum::<f64>() / total)
}

/// (Σw)² / Σw²; the usual importance-weight degeneracy diagnostic.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}
