//! End-to-end inference: mask → optimize → filter → ε → hyperboxes →
//! mixture proposal → weights → resampling, with budget accounting.

use crate::core::{jacobian, DifferentiableSimulator, NoiseDraw, ParamVector};
use crate::error::{Error, Result};
use crate::harness::budget::BudgetLedger;
use crate::harness::config::ExperimentConfig;
use crate::harness::image_demo;
use crate::harness::report::{AcceptanceStats, MaskSummary, RunReport};
use crate::linalg::Mat;
use crate::optimize::{filter_seeds, run_optimizations, select_epsilon, OptimizationRecord};
use crate::posterior::{
    build_proposal, compute_weights, effective_sample_size, region_counts_batch, resample,
    sample_proposal, AcceptedRegion, ProposalComponent, WeightedSample,
};
use crate::regions::{build_hyperbox_with_axes, jacobi_eigen, AxisFrame};
use crate::sensitivity::{compute_mask, Mask};
use crate::simulators::BenchmarkProblem;
use crate::streams::{substream, StreamKind};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

/// Everything a run produces. For the factorized image path the record,
/// candidate and box tables stay empty; see [`image_demo`].
pub struct InferenceOutput {
    pub samples: Vec<ParamVector>,
    pub weighted: Vec<WeightedSample>,
    pub records: Vec<OptimizationRecord>,
    /// The mixture proposal; its boxes serialize for diagnostic plotting.
    pub proposal: Vec<ProposalComponent>,
    pub mask: Mask,
    pub epsilon: f64,
    pub weight_epsilon: f64,
    pub report: RunReport,
}

/// Serializable view of one proposal box: center, per-direction extents and
/// the axis matrix (row-major, axes as columns).
#[derive(serde::Serialize)]
pub struct BoxSummary {
    pub obs_index: usize,
    pub seed_index: usize,
    pub center: Vec<f64>,
    pub neg_extents: Vec<f64>,
    pub pos_extents: Vec<f64>,
    pub axes: Vec<f64>,
}

/// Box dump for the report; intended for diagnostic plotting at modest
/// dimension (the axis matrices grow quadratically).
pub fn boxes_json(components: &[ProposalComponent]) -> String {
    let summaries: Vec<BoxSummary> = components
        .iter()
        .map(|c| BoxSummary {
            obs_index: c.obs_index,
            seed_index: c.seed_index,
            center: c.hyperbox.center().to_vec(),
            neg_extents: c.hyperbox.neg_extents().to_vec(),
            pos_extents: c.hyperbox.pos_extents().to_vec(),
            axes: c.hyperbox.axes().data().to_vec(),
        })
        .collect();
    serde_json::to_string_pretty(&summaries).expect("boxes serialize")
}

/// Regenerate the frozen noise draw of record (n, i); identical to what the
/// optimizer consumed because the stream is keyed by the same counters.
pub fn noise_for(
    sim: &dyn DifferentiableSimulator,
    master_seed: u64,
    obs_index: usize,
    seed_index: usize,
) -> NoiseDraw {
    let mut rng = substream(master_seed, StreamKind::Noise, obs_index as u64, seed_index as u64);
    sim.sample_noise(&mut rng)
}

/// Jacobian rows restricted to the mask's active output dimensions
/// (inactive rows zeroed; their Gram contribution vanishes).
fn masked_jacobian(j: &Mat, mask: &Mask) -> Mat {
    let mut out = j.clone();
    for (k, active) in mask.active().iter().enumerate() {
        if !active {
            for c in 0..out.cols() {
                out.set(k, c, 0.0);
            }
        }
    }
    out
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn mat_key(m: &Mat) -> u64 {
    let mut bytes = Vec::with_capacity(m.data().len() * 8 + 16);
    bytes.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fnv1a(&bytes)
}

/// Eigen frames keyed by Jacobian content. Linear simulators share one
/// frame across every record, which turns 784-dimensional box building from
/// hundreds of eigendecompositions into one.
struct EigenCache {
    map: Mutex<HashMap<u64, (std::sync::Arc<AxisFrame>, bool)>>,
}

impl EigenCache {
    fn new() -> Self {
        Self { map: Mutex::new(HashMap::new()) }
    }

    fn axes_for(&self, j: &Mat) -> (std::sync::Arc<AxisFrame>, bool) {
        let key = mat_key(j);
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let (v, _, converged) = jacobi_eigen(&j.gram());
        let result = if converged {
            (AxisFrame::from_axes(v).expect("jacobi output is orthonormal"), false)
        } else {
            (AxisFrame::identity(j.cols()), true)
        };
        self.map.lock().unwrap().insert(key, result.clone());
        result
    }
}

/// Run the full pipeline on a benchmark problem.
///
/// Deterministic for a fixed config and master seed, independent of the
/// rayon worker count: all randomness flows through per-(kind, n, i)
/// counter streams and reductions happen in fixed index order.
pub fn run_inference(
    problem: &BenchmarkProblem,
    cfg: &ExperimentConfig,
) -> Result<InferenceOutput> {
    cfg.validate()?;
    if problem.id == "img_pixel" {
        // The pixel-wise camera factorizes exactly; the importance weights
        // of the joint 784-dimensional run degenerate (one prior indicator
        // over every pixel), so the pipeline runs per pixel instead.
        return image_demo::run_pixelwise_factorized(problem, cfg);
    }
    let started = Instant::now();
    let sim = problem.sim();
    let observations = &problem.observations;
    let n_obs = observations.len();
    let seeds = cfg.seeds;
    let master = cfg.master_seed;
    let mut ledger = BudgetLedger::default();

    // 1. distractor mask, computed without any observation
    let mask = compute_mask(sim, cfg.mask.n_theta, cfg.mask.n_noise, cfg.mask.threshold, master)?;
    ledger.add_vectorized(cfg.mask.n_noise as u64, cfg.mask.n_theta as u64);

    // 2. deterministic minimizations, one per (observation, seed)
    let records = run_optimizations(sim, observations, seeds, &mask, &cfg.optimizer, master)?;
    ledger.add_vectorized((n_obs * (cfg.optimizer.steps + 1)) as u64, seeds as u64);

    // 3. acceptance filtering and ε selection
    let records = filter_seeds(&records, cfg.pcg_to_keep);
    let epsilon = select_epsilon(&records, &cfg.epsilon)?;
    let weight_epsilon = select_epsilon(&records, &cfg.weighting_rule())?;

    // 4. hyperboxes around accepted optima
    let accepted: Vec<&OptimizationRecord> = records.iter().filter(|r| r.accepted).collect();
    if accepted.is_empty() {
        return Err(Error::EmptyAccepted);
    }
    let cache = EigenCache::new();
    let active = mask.active().to_vec();
    let boxes: Vec<Result<(ProposalComponent, usize)>> = accepted
        .par_iter()
        .map(|rec| {
            let u = noise_for(sim, master, rec.obs_index, rec.seed_index);
            let theta_star = rec.theta();
            let j = jacobian(sim, &theta_star, &u)?;
            let (axes, fallback) = cache.axes_for(&masked_jacobian(&j, &mask));
            let y_obs = observations[rec.obs_index].values();
            let d_fn = |theta: &[f64]| {
                let y = sim.simulate_raw(theta, &u);
                crate::core::masked_sq_distance(&y, y_obs, &active)
            };
            let build = build_hyperbox_with_axes(
                &d_fn,
                &rec.theta_star,
                axes,
                fallback,
                &cfg.line_search,
                epsilon,
            )?;
            Ok((
                ProposalComponent {
                    hyperbox: build.hyperbox,
                    obs_index: rec.obs_index,
                    seed_index: rec.seed_index,
                },
                build.distance_evals,
            ))
        })
        .collect();
    let mut components = Vec::with_capacity(boxes.len());
    let mut line_search_instances = 0u64;
    let mut line_search_lockstep = 0u64;
    for b in boxes {
        let (component, evals) = b?;
        components.push(component);
        line_search_instances += evals as u64;
        // lockstep model: all directions of all accepted records of an
        // observation group walk together; calls = slowest walker's total
        line_search_lockstep = line_search_lockstep.max(evals as u64);
    }
    ledger.vectorized_calls += line_search_lockstep * n_obs as u64;
    ledger.add_instances(line_search_instances);

    let eigen_fallbacks = components.iter().filter(|c| c.hyperbox.eigen_fallback()).count();

    // 5. mixture proposal and candidates
    let mix = build_proposal(components.clone())?;
    let candidates = {
        let mut rng = substream(master, StreamKind::Proposal, 0, 0);
        sample_proposal(&mix, cfg.sampling.candidates, &mut rng)
    };

    // 6. weighting indicators by direct simulation over accepted seeds
    let regions: Vec<AcceptedRegion> = accepted
        .iter()
        .map(|rec| AcceptedRegion {
            obs_index: rec.obs_index,
            seed_index: rec.seed_index,
            noise: noise_for(sim, master, rec.obs_index, rec.seed_index),
        })
        .collect();
    let counts =
        region_counts_batch(sim, &candidates, &regions, observations, weight_epsilon, &mask);
    ledger.add_vectorized(regions.len() as u64, cfg.sampling.candidates as u64);

    let weighted = compute_weights(&candidates, sim.prior(), &mix, &counts)?;
    let samples = {
        let mut rng = substream(master, StreamKind::Resample, 0, 0);
        resample(&weighted, cfg.sampling.final_samples, &mut rng)?
    };

    let weights: Vec<f64> = weighted.iter().map(|w| w.weight).collect();
    let ess = effective_sample_size(&weights);
    let positive = weights.iter().filter(|w| **w > 0.0).count();

    ledger.fused_estimate = (n_obs * seeds) as u64;

    let report = RunReport {
        config: cfg.clone(),
        problem: problem.id.clone(),
        mask: MaskSummary::from_mask(&mask),
        acceptance: AcceptanceStats::from_records(&records, n_obs),
        epsilon,
        weight_epsilon,
        ess,
        positive_weight_fraction: positive as f64 / weights.len() as f64,
        eigen_fallbacks,
        factorized_image_mode: false,
        c2st_scores: Vec::new(),
        runtime_seconds: started.elapsed().as_secs_f64(),
        budget: ledger,
    };

    Ok(InferenceOutput {
        samples,
        weighted,
        records,
        proposal: components,
        mask,
        epsilon,
        weight_epsilon,
        report,
    })
}

/// Posterior mean over final samples, coordinate-wise.
pub fn posterior_mean(samples: &[ParamVector]) -> Vec<f64> {
    let d = samples[0].dim();
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.values()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= samples.len() as f64;
    }
    mean
}

/// Per-coordinate standard deviation over final samples.
pub fn posterior_std(samples: &[ParamVector]) -> Vec<f64> {
    let mean = posterior_mean(samples);
    let d = mean.len();
    let mut var = vec![0.0; d];
    for s in samples {
        for k in 0..d {
            let diff = s.values()[k] - mean[k];
            var[k] += diff * diff;
        }
    }
    var.iter().map(|v| (v / samples.len() as f64).sqrt()).collect()
}
