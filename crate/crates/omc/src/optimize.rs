//! Deterministic per-(observation, seed) minimization.
//!
//! For each observation n and frozen noise draw u_{i,n}, the masked distance
//! d_i^n(θ) is an ordinary deterministic function of θ. We minimize it with
//! Adam and keep the best iterate visited (the start point included), so the
//! recorded d* is a true minimum over the trace even when Adam overshoots.
//! Iterates are free to leave the prior support; the prior factor in the
//! importance weights zeroes such samples later.

use crate::core::{
    masked_sq_distance, DifferentiableSimulator, DistanceValue, NoiseDraw, OutputVector,
    ParamVector,
};
use crate::error::{Error, Result};
use crate::sensitivity::Mask;
use crate::streams::{substream, StreamKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the optimizer start point θ0 is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// One fresh prior sample per (observation, seed) record.
    PriorSample,
    /// Deterministic start at the prior mean (debugging aid).
    PriorMean,
}

/// Adam settings for the distance minimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init: InitStrategy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            steps: 50,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init: InitStrategy::PriorSample,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config("learning_rate must lie in (0, 1]".into()));
        }
        if self.steps < 1 {
            return Err(Error::Config("optimizer needs at least one step".into()));
        }
        Ok(())
    }
}

/// Plain Adam over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(dim: usize, cfg: &OptimizerConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            t: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for k in 0..params.len() {
            let g = grad[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Outcome of one (observation, seed) minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub obs_index: usize,
    pub seed_index: usize,
    pub theta_star: Vec<f64>,
    pub d_star: f64,
    pub accepted: bool,
    /// A non-finite distance or gradient was hit; never accepted.
    pub failed: bool,
}

impl OptimizationRecord {
    pub fn theta(&self) -> ParamVector {
        ParamVector::new(self.theta_star.clone()).expect("stored optimum is finite")
    }

    pub fn distance(&self) -> DistanceValue {
        DistanceValue::new(self.d_star).expect("stored distance is valid")
    }
}

/// Rule for selecting the acceptance-region threshold ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum EpsilonRule {
    /// ε = 2 · max over accepted records of d*, floored at [`EPSILON_FLOOR`].
    TwiceWorstAccepted,
    /// A fixed positive ε.
    Fixed(f64),
}

impl EpsilonRule {
    pub fn validate(&self) -> Result<()> {
        if let EpsilonRule::Fixed(v) = self {
            if !(*v > 0.0) {
                return Err(Error::Config("fixed epsilon must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Floor keeping ε strictly positive when optimization is exact; a zero ε
/// would give zero-volume acceptance regions.
pub const EPSILON_FLOOR: f64 = 1e-8;

/// Distance and gradient of the masked squared distance at θ.
///
/// The gradient is ∇_θ d = 2 Jᵀ (g(θ,u) ⊙ m − y ⊙ m); simulators with
/// structured Jacobians override [`DifferentiableSimulator::jacobian_raw`]'s
/// generic route through [`distance_and_grad`]'s caller as needed.
pub fn distance_and_grad(
    sim: &dyn DifferentiableSimulator,
    theta: &[f64],
    u: &NoiseDraw,
    y_obs: &[f64],
    mask: &Mask,
) -> (f64, Vec<f64>) {
    let y = sim.simulate_raw(theta, u);
    let active = mask.active();
    let d = masked_sq_distance(&y, y_obs, active);
    let mut residual = vec![0.0; y.len()];
    for k in 0..y.len() {
        if active[k] {
            residual[k] = 2.0 * (y[k] - y_obs[k]);
        }
    }
    let grad = sim.apply_jacobian_transpose(theta, u, &residual);
    (d, grad)
}

/// Minimize d_i^n(θ) from θ0 with Adam; returns the best iterate visited.
pub fn optimize_seed(
    sim: &dyn DifferentiableSimulator,
    u: &NoiseDraw,
    y_obs: &OutputVector,
    mask: &Mask,
    theta0: &ParamVector,
    cfg: &OptimizerConfig,
    obs_index: usize,
    seed_index: usize,
) -> OptimizationRecord {
    debug_assert_eq!(theta0.dim(), sim.param_dim());
    let mut theta = theta0.values().to_vec();
    let mut adam = Adam::new(theta.len(), cfg);

    let mut best_theta = theta.clone();
    let mut best_d = f64::INFINITY;
    let mut failed = false;

    for _ in 0..cfg.steps {
        let (d, grad) = distance_and_grad(sim, &theta, u, y_obs.values(), mask);
        if !d.is_finite() || !grad.iter().all(|g| g.is_finite()) {
            failed = true;
            break;
        }
        if d < best_d {
            best_d = d;
            best_theta.copy_from_slice(&theta);
        }
        adam.step(&mut theta, &grad);
        if !theta.iter().all(|t| t.is_finite()) {
            failed = true;
            break;
        }
    }
    if !failed {
        let y = sim.simulate_raw(&theta, u);
        let d = masked_sq_distance(&y, y_obs.values(), mask.active());
        if d.is_finite() {
            if d < best_d {
                best_d = d;
                best_theta.copy_from_slice(&theta);
            }
        } else {
            failed = true;
        }
    }
    if !best_d.is_finite() {
        // Even θ0 failed: report the start point and flag the record.
        best_theta.copy_from_slice(theta0.values());
        best_d = f64::MAX;
        failed = true;
    }

    OptimizationRecord {
        obs_index,
        seed_index,
        theta_star: best_theta,
        d_star: best_d,
        accepted: false,
        failed,
    }
}

/// Run S independent minimizations per observation.
///
/// Noise draws and start points come from per-(n, i) counter streams of the
/// master seed, so the table is identical regardless of worker count.
/// Records are ordered by (obs_index, seed_index).
pub fn run_optimizations(
    sim: &dyn DifferentiableSimulator,
    observations: &[OutputVector],
    seeds: usize,
    mask: &Mask,
    cfg: &OptimizerConfig,
    master_seed: u64,
) -> Result<Vec<OptimizationRecord>> {
    if observations.is_empty() {
        return Err(Error::Config("need at least one observation".into()));
    }
    if seeds < 1 {
        return Err(Error::Config("need at least one seed".into()));
    }
    cfg.validate()?;
    for y in observations {
        if y.dim() != sim.output_dim() {
            return Err(Error::Schema("observation length != simulator output dim".into()));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..observations.len())
        .flat_map(|n| (0..seeds).map(move |i| (n, i)))
        .collect();

    let records: Vec<OptimizationRecord> = jobs
        .par_iter()
        .map(|&(n, i)| {
            let u = {
                let mut rng = substream(master_seed, StreamKind::Noise, n as u64, i as u64);
                sim.sample_noise(&mut rng)
            };
            let theta0 = match cfg.init {
                InitStrategy::PriorSample => {
                    let mut rng = substream(master_seed, StreamKind::Init, n as u64, i as u64);
                    sim.prior().sample(&mut rng)
                }
                InitStrategy::PriorMean => sim.prior().mean(),
            };
            optimize_seed(sim, &u, &observations[n], mask, &theta0, cfg, n, i)
        })
        .collect();

    Ok(records)
}

/// Mark accepted, per observation independently, the ⌈pcg·S⌉ records with
/// the smallest d*; ties break toward the lower seed index. Failed records
/// are never accepted.
pub fn filter_seeds(records: &[OptimizationRecord], pcg_to_keep: f64) -> Vec<OptimizationRecord> {
    assert!(
        pcg_to_keep > 0.0 && pcg_to_keep <= 1.0,
        "pcg_to_keep must lie in (0, 1]"
    );
    let mut out = records.to_vec();
    let max_obs = records.iter().map(|r| r.obs_index).max().map_or(0, |m| m + 1);
    for n in 0..max_obs {
        let mut idx: Vec<usize> = (0..out.len())
            .filter(|&k| out[k].obs_index == n && !out[k].failed)
            .collect();
        let total = out.iter().filter(|r| r.obs_index == n).count();
        let keep = ((pcg_to_keep * total as f64).ceil() as usize).min(idx.len());
        idx.sort_by(|&a, &b| {
            out[a]
                .d_star
                .partial_cmp(&out[b].d_star)
                .unwrap()
                .then(out[a].seed_index.cmp(&out[b].seed_index))
        });
        for &k in idx.iter().take(keep) {
            out[k].accepted = true;
        }
        for &k in idx.iter().skip(keep) {
            out[k].accepted = false;
        }
    }
    out
}

/// ε from the accepted records under the given rule; always strictly positive.
pub fn select_epsilon(records: &[OptimizationRecord], rule: &EpsilonRule) -> Result<f64> {
    rule.validate()?;
    match rule {
        EpsilonRule::Fixed(v) => Ok(*v),
        EpsilonRule::TwiceWorstAccepted => {
            let worst = records
                .iter()
                .filter(|r| r.accepted)
                .map(|r| r.d_star)
                .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
            match worst {
                None => Err(Error::EmptyAccepted),
                Some(w) => Ok((2.0 * w).max(EPSILON_FLOOR)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{NoiseSpec, UniformPrior};
    use crate::linalg::Mat;
    use crate::simulators::mog::{MogSimulator, MogVariant};

    fn record(n: usize, i: usize, d: f64) -> OptimizationRecord {
        OptimizationRecord {
            obs_index: n,
            seed_index: i,
            theta_star: vec![0.0],
            d_star: d,
            accepted: false,
            failed: false,
        }
    }

    #[test]
    fn adam_reaches_the_analytic_minimum() {
        // d(θ) = (θ + 1)² via the 1-D shifted Gaussian with z = 0.
        let sim = MogSimulator::new(1, MogVariant::Base, 0);
        let u = NoiseDraw::new(vec![0.0], vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0]).unwrap();
        let cfg = OptimizerConfig { learning_rate: 0.2, steps: 400, ..Default::default() };
        let theta0 = ParamVector::new(vec![0.5]).unwrap();
        let rec = optimize_seed(&sim, &u, &y_obs, &Mask::full(1), &theta0, &cfg, 0, 0);
        assert!(!rec.failed);
        assert!((rec.theta_star[0] + 1.0).abs() < 1e-3, "θ* = {}", rec.theta_star[0]);
        assert!(rec.d_star <= 1e-6, "d* = {}", rec.d_star);
    }

    #[test]
    fn start_at_minimum_stays_there() {
        let sim = MogSimulator::new(1, MogVariant::Base, 0);
        let u = NoiseDraw::new(vec![0.0], vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0]).unwrap();
        let cfg = OptimizerConfig::default();
        let theta0 = ParamVector::new(vec![-1.0]).unwrap();
        let rec = optimize_seed(&sim, &u, &y_obs, &Mask::full(1), &theta0, &cfg, 0, 0);
        assert_eq!(rec.theta_star, vec![-1.0]);
        assert_eq!(rec.d_star, 0.0);
    }

    struct ConstantSim {
        prior: UniformPrior,
    }

    impl DifferentiableSimulator for ConstantSim {
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
            NoiseSpec { gaussian: 0, selectors: 0, uniforms: 0 }
        }
        fn sample_noise(&self, _rng: &mut dyn rand::RngCore) -> NoiseDraw {
            NoiseDraw::new(vec![], vec![], vec![])
        }
        fn simulate_raw(&self, _theta: &[f64], _noise: &NoiseDraw) -> Vec<f64> {
            vec![2.0]
        }
        fn jacobian_raw(&self, _theta: &[f64], _noise: &NoiseDraw) -> Mat {
            Mat::zeros(1, 1)
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let sim = ConstantSim { prior: UniformPrior::symmetric(1, 3.0) };
        let u = NoiseDraw::new(vec![], vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0]).unwrap();
        let cfg = OptimizerConfig::default();
        let theta0 = ParamVector::new(vec![0.7]).unwrap();
        let rec = optimize_seed(&sim, &u, &y_obs, &Mask::full(1), &theta0, &cfg, 0, 0);
        assert_eq!(rec.theta_star, vec![0.7]);
        assert_eq!(rec.d_star, 4.0);
    }

    #[test]
    fn best_iterate_never_exceeds_start_distance() {
        let sim = MogSimulator::new(2, MogVariant::Base, 0);
        let y_obs = OutputVector::new(vec![0.0, 0.0]).unwrap();
        let mask = Mask::full(2);
        for seed in 0..20u64 {
            let mut rng = substream(seed, StreamKind::Noise, 0, 0);
            let u = sim.sample_noise(&mut rng);
            let theta0 = sim.prior().sample(&mut rng);
            let d0 = crate::core::masked_distance(&sim, &theta0, &u, &y_obs, &mask)
                .unwrap()
                .value();
            let cfg = OptimizerConfig { learning_rate: 0.3, steps: 7, ..Default::default() };
            let rec = optimize_seed(&sim, &u, &y_obs, &mask, &theta0, &cfg, 0, 0);
            assert!(rec.d_star <= d0 + 1e-15);
        }
    }

    #[test]
    fn identical_inputs_give_identical_records_apart_from_index() {
        let sim = MogSimulator::new(1, MogVariant::Base, 0);
        let u = NoiseDraw::new(vec![0.4], vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0]).unwrap();
        let cfg = OptimizerConfig::default();
        let theta0 = ParamVector::new(vec![0.3]).unwrap();
        let a = optimize_seed(&sim, &u, &y_obs, &Mask::full(1), &theta0, &cfg, 0, 0);
        let b = optimize_seed(&sim, &u, &y_obs, &Mask::full(1), &theta0, &cfg, 1, 0);
        assert_eq!(a.theta_star, b.theta_star);
        assert_eq!(a.d_star, b.d_star);
    }

    #[test]
    fn run_produces_one_record_per_pair_with_distinct_noise() {
        let sim = MogSimulator::new(1, MogVariant::Base, 0);
        let obs = vec![OutputVector::new(vec![0.0]).unwrap()];
        let cfg = OptimizerConfig { steps: 2, ..Default::default() };
        let recs = run_optimizations(&sim, &obs, 3, &Mask::full(1), &cfg, 7).unwrap();
        assert_eq!(recs.len(), 3);
        // distinct noise draws lead to distinct optima
        assert_ne!(recs[0].theta_star, recs[1].theta_star);
        assert_ne!(recs[1].theta_star, recs[2].theta_star);
        for (k, r) in recs.iter().enumerate() {
            assert_eq!((r.obs_index, r.seed_index), (0, k));
        }
    }

    #[test]
    fn run_is_deterministic_for_a_fixed_master_seed() {
        let sim = MogSimulator::new(2, MogVariant::TwoModes, 0);
        let obs = vec![
            OutputVector::new(vec![0.0, 0.0]).unwrap(),
            OutputVector::new(vec![0.0, 0.0]).unwrap(),
        ];
        let cfg = OptimizerConfig { steps: 5, ..Default::default() };
        let a = run_optimizations(&sim, &obs, 4, &Mask::full(2), &cfg, 99).unwrap();
        let b = run_optimizations(&sim, &obs, 4, &Mask::full(2), &cfg, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn most_quadratic_optimizations_converge() {
        let sim = MogSimulator::new(2, MogVariant::Base, 0);
        let obs = vec![OutputVector::new(vec![0.0, 0.0]).unwrap()];
        let cfg =
            OptimizerConfig { learning_rate: 0.1, steps: 400, ..Default::default() };
        let recs = run_optimizations(&sim, &obs, 100, &Mask::full(2), &cfg, 13).unwrap();
        let good = recs.iter().filter(|r| r.d_star < 0.01).count();
        assert!(good >= 95, "only {good}/100 reached d* < 0.01");
    }

    #[test]
    fn filter_keeps_the_best_fraction_per_observation() {
        let recs: Vec<_> = (0..10).map(|i| record(0, i, (i + 1) as f64)).collect();
        let out = filter_seeds(&recs, 0.8);
        for r in &out {
            assert_eq!(r.accepted, r.d_star <= 8.0, "d*={}", r.d_star);
        }
    }

    #[test]
    fn filter_with_pcg_one_accepts_everything() {
        let recs: Vec<_> = (0..5).map(|i| record(0, i, i as f64)).collect();
        assert!(filter_seeds(&recs, 1.0).iter().all(|r| r.accepted));
    }

    #[test]
    fn filter_breaks_ties_by_seed_index() {
        let recs: Vec<_> = (0..4).map(|i| record(0, i, 1.0)).collect();
        let out = filter_seeds(&recs, 0.5);
        assert!(out[0].accepted && out[1].accepted);
        assert!(!out[2].accepted && !out[3].accepted);
    }

    #[test]
    fn filter_is_monotone_in_pcg() {
        let d = [0.4, 0.1, 0.9, 0.2, 0.6, 0.3, 0.8, 0.5];
        let recs: Vec<_> = d.iter().enumerate().map(|(i, &v)| record(0, i, v)).collect();
        let mut prev: Vec<usize> = vec![];
        for pcg in [0.25, 0.5, 0.75, 1.0] {
            let now: Vec<usize> = filter_seeds(&recs, pcg)
                .iter()
                .filter(|r| r.accepted)
                .map(|r| r.seed_index)
                .collect();
            for i in &prev {
                assert!(now.contains(i), "record {i} lost when pcg rose to {pcg}");
            }
            prev = now;
        }
    }

    #[test]
    fn failed_records_are_never_accepted() {
        let mut recs: Vec<_> = (0..4).map(|i| record(0, i, 0.1)).collect();
        recs[1].failed = true;
        let out = filter_seeds(&recs, 1.0);
        assert!(!out[1].accepted);
        assert_eq!(out.iter().filter(|r| r.accepted).count(), 3);
    }

    #[test]
    fn epsilon_rules() {
        let mut recs = vec![record(0, 0, 0.1), record(0, 1, 0.2), record(0, 2, 0.4)];
        for r in &mut recs {
            r.accepted = true;
        }
        assert_eq!(
            select_epsilon(&recs, &EpsilonRule::TwiceWorstAccepted).unwrap(),
            0.8
        );
        assert_eq!(select_epsilon(&recs, &EpsilonRule::Fixed(0.1)).unwrap(), 0.1);

        let mut zeros = vec![record(0, 0, 0.0)];
        zeros[0].accepted = true;
        assert_eq!(
            select_epsilon(&zeros, &EpsilonRule::TwiceWorstAccepted).unwrap(),
            EPSILON_FLOOR
        );

        let empty: Vec<OptimizationRecord> = vec![];
        assert!(matches!(
            select_epsilon(&empty, &EpsilonRule::TwiceWorstAccepted),
            Err(Error::EmptyAccepted)
        ));
    }

    #[test]
    fn epsilon_is_monotone_in_pcg() {
        let d = [0.4, 0.1, 0.9, 0.2, 0.6, 0.3, 0.8, 0.5];
        let recs: Vec<_> = d.iter().enumerate().map(|(i, &v)| record(0, i, v)).collect();
        let mut prev = 0.0;
        for pcg in [0.25, 0.5, 0.75, 1.0] {
            let eps = select_epsilon(&filter_seeds(&recs, pcg), &EpsilonRule::TwiceWorstAccepted)
                .unwrap();
            assert!(eps >= prev);
            prev = eps;
        }
    }
}
