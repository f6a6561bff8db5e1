//! Image inference demos.
//!
//! The pixel-wise camera factorizes exactly: prior, likelihood and distance
//! all decompose per pixel, so the pipeline runs as 784 independent scalar
//! inferences whose draws reassemble into joint posterior samples. A joint
//! 784-dimensional importance run cannot work there — the prior indicator
//! multiplies across every pixel, so the probability that a candidate keeps
//! all coordinates inside the unit box vanishes. The checkerboard camera
//! couples pixels and runs through the ordinary joint pipeline.

use crate::core::{
    standard_normal, DifferentiableSimulator, NoiseDraw, NoiseSpec, OutputVector, ParamVector,
    UniformPrior,
};
use crate::error::Result;
use crate::harness::budget::BudgetLedger;
use crate::harness::config::ExperimentConfig;
use crate::harness::report::{AcceptanceStats, MaskSummary, RunReport};
use crate::harness::runner::{self, InferenceOutput};
use crate::linalg::Mat;
use crate::optimize::{filter_seeds, run_optimizations, select_epsilon};
use crate::posterior::{
    build_proposal, compute_weights, effective_sample_size, region_counts, resample,
    sample_proposal, AcceptedRegion, ProposalComponent,
};
use crate::regions::{build_hyperbox_with_axes, AxisFrame};
use crate::sensitivity::Mask;
use crate::simulators::image::{oracle_mean_image, PixelwiseCamera, IMAGE_DIM};
use crate::simulators::{io, BenchmarkProblem};
use crate::streams::{substream, StreamKind};
use rand::RngCore;
use rayon::prelude::*;
use std::path::Path;
use std::time::Instant;

/// One pixel of the pixel-wise camera: y = aθ + b + σz over θ ∈ [0, 1].
struct ScalarPixelSim {
    gain: f64,
    offset: f64,
    noise: f64,
    prior: UniformPrior,
}

impl ScalarPixelSim {
    fn new(gain: f64, offset: f64, noise: f64) -> Self {
        Self { gain, offset, noise, prior: UniformPrior::new(vec![0.0], vec![1.0]).expect("unit") }
    }
}

impl DifferentiableSimulator for ScalarPixelSim {
    fn param_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn prior(&self) -> &UniformPrior {
        &self.prior
    }
    fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec { gaussian: 1, selectors: 0, uniforms: 0 }
    }
    fn sample_noise(&self, rng: &mut dyn RngCore) -> NoiseDraw {
        NoiseDraw::new(vec![standard_normal(rng)], vec![], vec![])
    }
    fn simulate_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Vec<f64> {
        vec![self.gain * theta[0] + self.offset + self.noise * noise.gaussian()[0]]
    }
    fn jacobian_raw(&self, _theta: &[f64], _noise: &NoiseDraw) -> Mat {
        Mat::from_rows(&[vec![self.gain]])
    }
}

struct PixelRun {
    samples: Vec<f64>,
    ess: f64,
    accepted: usize,
    instances: u64,
}

fn run_one_pixel(
    sim: &ScalarPixelSim,
    y_obs: f64,
    cfg: &ExperimentConfig,
    pixel_seed: u64,
) -> Result<PixelRun> {
    let mask = Mask::full(1);
    let observations = vec![OutputVector::new(vec![y_obs])?];
    let records =
        run_optimizations(sim, &observations, cfg.seeds, &mask, &cfg.optimizer, pixel_seed)?;
    let records = filter_seeds(&records, cfg.pcg_to_keep);
    let base_epsilon =
        select_epsilon(&records, &cfg.epsilon)?.max(select_epsilon(&records, &cfg.weighting_rule())?);

    let accepted: Vec<_> = records.iter().filter(|r| r.accepted).collect();
    let noises: Vec<NoiseDraw> = accepted
        .iter()
        .map(|rec| runner::noise_for(sim, pixel_seed, rec.obs_index, rec.seed_index))
        .collect();

    // Boundary pixels can have every unconstrained optimum outside [0, 1];
    // at a tiny fixed ε no acceptance region would then intersect the prior
    // and every weight would vanish. Floor ε at twice the tenth-percentile
    // distance evaluated at the optima clamped into the prior, so a band of
    // regions always reaches the support.
    let mut clipped: Vec<f64> = accepted
        .iter()
        .zip(&noises)
        .map(|(rec, u)| {
            let at = [rec.theta_star[0].clamp(0.0, 1.0)];
            let y = sim.simulate_raw(&at, u);
            let diff = y[0] - y_obs;
            diff * diff
        })
        .collect();
    clipped.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = clipped[(clipped.len().div_ceil(10) - 1).min(clipped.len() - 1)];
    let epsilon = base_epsilon.max(2.0 * quantile);
    let weight_epsilon = epsilon;

    let mut instances = (cfg.seeds * (cfg.optimizer.steps + 1)) as u64;
    let mut components = Vec::new();
    let mut regions = Vec::new();
    let scalar_frame = AxisFrame::identity(1);
    for (rec, u) in accepted.iter().zip(noises) {
        let d_fn = |theta: &[f64]| {
            let y = sim.simulate_raw(theta, &u);
            let diff = y[0] - y_obs;
            diff * diff
        };
        let build = build_hyperbox_with_axes(
            &d_fn,
            &rec.theta_star,
            scalar_frame.clone(),
            false,
            &cfg.line_search,
            epsilon,
        )?;
        instances += build.distance_evals as u64;
        components.push(ProposalComponent {
            hyperbox: build.hyperbox,
            obs_index: rec.obs_index,
            seed_index: rec.seed_index,
        });
        regions.push(AcceptedRegion {
            obs_index: rec.obs_index,
            seed_index: rec.seed_index,
            noise: u,
        });
    }
    let mix = build_proposal(components)?;
    let candidates = {
        let mut rng = substream(pixel_seed, StreamKind::Proposal, 0, 0);
        sample_proposal(&mix, cfg.sampling.candidates, &mut rng)
    };
    let counts: Vec<Vec<u32>> = candidates
        .iter()
        .map(|t| region_counts(sim, t.values(), &regions, &observations, weight_epsilon, &mask))
        .collect();
    instances += (regions.len() * cfg.sampling.candidates) as u64;
    let weighted = compute_weights(&candidates, sim.prior(), &mix, &counts)?;
    let samples = {
        let mut rng = substream(pixel_seed, StreamKind::Resample, 0, 0);
        resample(&weighted, cfg.sampling.final_samples, &mut rng)?
    };
    let weights: Vec<f64> = weighted.iter().map(|w| w.weight).collect();
    Ok(PixelRun {
        samples: samples.into_iter().map(|s| s[0]).collect(),
        ess: effective_sample_size(&weights),
        accepted: regions.len(),
        instances,
    })
}

/// The factorized pixel-wise run behind `run_inference("img_pixel")`.
pub fn run_pixelwise_factorized(
    problem: &BenchmarkProblem,
    cfg: &ExperimentConfig,
) -> Result<InferenceOutput> {
    let started = Instant::now();
    let camera = problem
        .simulator
        .as_ref()
        .as_any()
        .downcast_ref::<PixelwiseCamera>()
        .expect("img_pixel problem carries a pixel-wise camera");
    let y_obs = &problem.observations[0];

    let pixel_runs: Vec<Result<PixelRun>> = (0..IMAGE_DIM)
        .into_par_iter()
        .map(|k| {
            let sim = ScalarPixelSim::new(camera.gain, camera.offset, camera.noise);
            run_one_pixel(&sim, y_obs[k], cfg, crate::streams::mix(cfg.master_seed, k as u64))
        })
        .collect();

    let mut per_pixel = Vec::with_capacity(IMAGE_DIM);
    for run in pixel_runs {
        per_pixel.push(run?);
    }

    let m = cfg.sampling.final_samples;
    let samples: Vec<ParamVector> = (0..m)
        .map(|idx| {
            ParamVector::new(per_pixel.iter().map(|p| p.samples[idx]).collect())
                .expect("pixel samples are finite")
        })
        .collect();

    let mut ledger = BudgetLedger::default();
    for p in &per_pixel {
        ledger.add_instances(p.instances);
    }
    // the pixel dimension rides inside each vectorized call, so the call
    // count follows one scalar pipeline: optimizer steps, the slowest
    // line-search walker, one indicator pass per accepted seed
    ledger.vectorized_calls = (cfg.mask.n_noise + cfg.optimizer.steps + 1) as u64
        + per_pixel.iter().map(|p| p.accepted as u64).max().unwrap_or(0);
    ledger.fused_estimate = cfg.seeds as u64;

    let mean_ess = per_pixel.iter().map(|p| p.ess).sum::<f64>() / IMAGE_DIM as f64;
    let accepted_total: usize = per_pixel.iter().map(|p| p.accepted).sum();

    let report = RunReport {
        problem: problem.id.clone(),
        config: cfg.clone(),
        mask: MaskSummary::from_mask(&Mask::full(IMAGE_DIM)),
        acceptance: AcceptanceStats {
            total_records: IMAGE_DIM * cfg.seeds,
            accepted_per_observation: vec![accepted_total],
            failed_records: 0,
            d_star_min: f64::NAN,
            d_star_median: f64::NAN,
            d_star_max_accepted: f64::NAN,
        },
        epsilon: match cfg.epsilon {
            crate::optimize::EpsilonRule::Fixed(v) => v,
            crate::optimize::EpsilonRule::TwiceWorstAccepted => f64::NAN,
        },
        weight_epsilon: match cfg.weighting_rule() {
            crate::optimize::EpsilonRule::Fixed(v) => v,
            crate::optimize::EpsilonRule::TwiceWorstAccepted => f64::NAN,
        },
        ess: mean_ess,
        positive_weight_fraction: f64::NAN,
        eigen_fallbacks: 0,
        factorized_image_mode: true,
        c2st_scores: Vec::new(),
        runtime_seconds: started.elapsed().as_secs_f64(),
        budget: ledger,
    };

    Ok(InferenceOutput {
        samples,
        weighted: Vec::new(),
        records: Vec::new(),
        proposal: Vec::new(),
        mask: Mask::full(IMAGE_DIM),
        epsilon: report.epsilon,
        weight_epsilon: report.weight_epsilon,
        report,
    })
}

/// Outcome of an image demo: posterior statistics against the analytic
/// mean oracle.
pub struct ImageDemoResult {
    pub observation: Vec<f64>,
    pub posterior_mean: Vec<f64>,
    pub posterior_std: Vec<f64>,
    pub oracle_mean: Vec<f64>,
    pub mean_absolute_error: f64,
    pub report: RunReport,
}

/// Run an image problem end to end and compare against its mean oracle.
pub fn image_demo(problem: &BenchmarkProblem, cfg: &ExperimentConfig) -> Result<ImageDemoResult> {
    let out = runner::run_inference(problem, cfg)?;
    let posterior_mean = runner::posterior_mean(&out.samples);
    let posterior_std = runner::posterior_std(&out.samples);
    let oracle_mean = oracle_mean_image(problem)?;
    let mae = posterior_mean
        .iter()
        .zip(&oracle_mean)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / posterior_mean.len() as f64;
    Ok(ImageDemoResult {
        observation: problem.observations[0].values().to_vec(),
        posterior_mean,
        posterior_std,
        oracle_mean,
        mean_absolute_error: mae,
        report: out.report,
    })
}

/// Write the demo images (observation, posterior mean/std, oracle mean) as
/// PGM files into `dir`.
pub fn write_demo_images(dir: &Path, tag: &str, result: &ImageDemoResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_pgm(&dir.join(format!("{tag}_observation.pgm")), &result.observation)?;
    io::write_pgm(&dir.join(format!("{tag}_posterior_mean.pgm")), &result.posterior_mean)?;
    let std_scaled: Vec<f64> = {
        let max = result.posterior_std.iter().cloned().fold(1e-12, f64::max);
        result.posterior_std.iter().map(|s| s / max).collect()
    };
    io::write_pgm(&dir.join(format!("{tag}_posterior_std.pgm")), &std_scaled)?;
    io::write_pgm(&dir.join(format!("{tag}_oracle_mean.pgm")), &result.oracle_mean)?;
    Ok(())
}
