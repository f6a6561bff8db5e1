//! Simulator abstraction and the deterministic distance machinery.
//!
//! A simulator here is a pure map `g(θ, u)` from parameters and a frozen
//! noise record to an output vector. Freezing `u` is what turns a stochastic
//! simulator into a family of deterministic functions that can be minimized
//! with ordinary gradient descent: re-simulating with the same `(θ, u)` must
//! yield bit-identical output.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::sensitivity::Mask;
use rand::RngCore;
use std::ops::Deref;

/// A point θ in the D-dimensional parameter space. Entries are finite, D ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Schema("parameter vector must have D >= 1".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("parameter vector entry".into()));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Simulator output y = g(θ, u). Entries are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputVector {
    values: Vec<f64>,
}

impl OutputVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("output vector entry".into()));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Deref for OutputVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// The frozen nuisance record u that makes a simulator deterministic.
///
/// Gaussian innovations, discrete selectors (e.g. mixture-mode signs) and
/// auxiliary uniforms (angles, distractor values) are stored separately so a
/// simulator can consume exactly the randomness schema it declares. A draw is
/// immutable after creation and reusable across any θ of matching dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDraw {
    gaussian: Vec<f64>,
    selectors: Vec<i8>,
    uniforms: Vec<f64>,
}

impl NoiseDraw {
    pub fn new(gaussian: Vec<f64>, selectors: Vec<i8>, uniforms: Vec<f64>) -> Self {
        Self { gaussian, selectors, uniforms }
    }

    pub fn gaussian(&self) -> &[f64] {
        &self.gaussian
    }

    pub fn selectors(&self) -> &[i8] {
        &self.selectors
    }

    pub fn uniforms(&self) -> &[f64] {
        &self.uniforms
    }
}

/// Shape of the noise record a simulator consumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseSpec {
    pub gaussian: usize,
    pub selectors: usize,
    pub uniforms: usize,
}

impl NoiseSpec {
    pub fn matches(&self, u: &NoiseDraw) -> bool {
        u.gaussian.len() == self.gaussian
            && u.selectors.len() == self.selectors
            && u.uniforms.len() == self.uniforms
    }
}

/// A nonnegative squared-distance value in output-space units.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DistanceValue(f64);

impl DistanceValue {
    pub fn new(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("distance".into()));
        }
        if v < 0.0 {
            return Err(Error::Schema("distance must be nonnegative".into()));
        }
        Ok(Self(v))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Uniform box prior with componentwise bounds (lower < upper).
#[derive(Clone, Debug, PartialEq)]
pub struct UniformPrior {
    lower: Vec<f64>,
    upper: Vec<f64>,
    log_density: f64,
}

impl UniformPrior {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Schema("prior bounds length mismatch".into()));
        }
        let mut log_vol = 0.0;
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Schema("prior requires lower < upper componentwise".into()));
            }
            log_vol += (u - l).ln();
        }
        Ok(Self { lower, upper, log_density: -log_vol })
    }

    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim]).expect("valid bounds")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Closed-box containment: the boundary counts as inside.
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.lower.len()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| *t >= *l && *t <= *u)
    }

    /// Density of the uniform box: constant inside, zero outside.
    pub fn density(&self, theta: &[f64]) -> f64 {
        if self.contains(theta) {
            self.log_density.exp()
        } else {
            0.0
        }
    }

    /// Log density; −∞ outside the box.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        if self.contains(theta) {
            self.log_density
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> ParamVector {
        let values = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + crate::core::unit_f64(rng) * (u - l))
            .collect();
        ParamVector::new(values).expect("prior sample is finite")
    }

    pub fn mean(&self) -> ParamVector {
        let values = self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect();
        ParamVector::new(values).expect("prior mean is finite")
    }
}

/// Uniform f64 in [0, 1) with 53 bits of precision.
#[inline]
pub fn unit_f64(rng: &mut dyn RngCore) -> f64 {
    const DEN: f64 = (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64) / DEN
}

/// Standard normal via Box–Muller; consumes two uniforms per call.
pub fn standard_normal(rng: &mut dyn RngCore) -> f64 {
    let u1 = (1.0 - unit_f64(rng)).max(f64::MIN_POSITIVE);
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Object-safe downcasting support, implemented for every simulator.
pub trait AsAny {
    fn as_any(&self) -> &dyn std::any::Any;
}

impl<T: std::any::Any> AsAny for T {
    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// A deterministic, differentiable map g(θ, u) with a uniform box prior.
///
/// `simulate` and `jacobian` must be pure functions of `(θ, u)`; all
/// randomness lives in the `NoiseDraw` produced by `sample_noise`.
pub trait DifferentiableSimulator: Sync + Send + AsAny {
    fn param_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn prior(&self) -> &UniformPrior;
    fn noise_spec(&self) -> NoiseSpec;
    fn has_analytic_jacobian(&self) -> bool {
        true
    }
    fn sample_noise(&self, rng: &mut dyn RngCore) -> NoiseDraw;
    /// Raw forward map; inputs are assumed schema-valid (see [`simulate`]).
    fn simulate_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Vec<f64>;
    /// Raw Jacobian ∂g/∂θ at (θ, u); rows index outputs, columns parameters.
    fn jacobian_raw(&self, theta: &[f64], noise: &NoiseDraw) -> Mat;
    /// Jᵀ v without materializing J; override when J has cheap structure.
    fn apply_jacobian_transpose(&self, theta: &[f64], noise: &NoiseDraw, v: &[f64]) -> Vec<f64> {
        self.jacobian_raw(theta, noise).t_matvec(v)
    }
}

fn check_schema(sim: &dyn DifferentiableSimulator, theta: &ParamVector, u: &NoiseDraw) -> Result<()> {
    if theta.dim() != sim.param_dim() {
        return Err(Error::Schema(format!(
            "theta has dimension {}, simulator expects {}",
            theta.dim(),
            sim.param_dim()
        )));
    }
    if !sim.noise_spec().matches(u) {
        return Err(Error::Schema("noise draw does not match the simulator's schema".into()));
    }
    Ok(())
}

/// Deterministic forward evaluation y = g(θ, u).
pub fn simulate(
    sim: &dyn DifferentiableSimulator,
    theta: &ParamVector,
    u: &NoiseDraw,
) -> Result<OutputVector> {
    check_schema(sim, theta, u)?;
    let y = sim.simulate_raw(theta.values(), u);
    debug_assert_eq!(y.len(), sim.output_dim());
    OutputVector::new(y)
}

/// Analytic Jacobian ∂g/∂θ of the noise-frozen simulator.
///
/// Kinks use the subgradient convention sign(0) = 0.
pub fn jacobian(
    sim: &dyn DifferentiableSimulator,
    theta: &ParamVector,
    u: &NoiseDraw,
) -> Result<Mat> {
    check_schema(sim, theta, u)?;
    if !sim.has_analytic_jacobian() {
        return Err(Error::Capability(
            "simulator lacks an analytic Jacobian and finite differences are disabled".into(),
        ));
    }
    let j = sim.jacobian_raw(theta.values(), u);
    debug_assert_eq!((j.rows(), j.cols()), (sim.output_dim(), sim.param_dim()));
    Ok(j)
}

/// Central-difference Jacobian, column by column. Test oracle only; never
/// part of the inference path.
pub fn finite_diff_jacobian(
    sim: &dyn DifferentiableSimulator,
    theta: &ParamVector,
    u: &NoiseDraw,
    h: f64,
) -> Result<Mat> {
    check_schema(sim, theta, u)?;
    assert!(h > 0.0, "step must be positive");
    let d = sim.param_dim();
    let dy = sim.output_dim();
    let mut j = Mat::zeros(dy, d);
    let mut plus = theta.values().to_vec();
    let mut minus = theta.values().to_vec();
    for c in 0..d {
        plus[c] += h;
        minus[c] -= h;
        let yp = sim.simulate_raw(&plus, u);
        let ym = sim.simulate_raw(&minus, u);
        for r in 0..dy {
            j.set(r, c, (yp[r] - ym[r]) / (2.0 * h));
        }
        plus[c] = theta.values()[c];
        minus[c] = theta.values()[c];
    }
    Ok(j)
}

/// Masked squared Euclidean distance over the active output dimensions:
/// Σ_{k active} (g_k(θ, u) − y_obs_k)².
pub fn masked_distance(
    sim: &dyn DifferentiableSimulator,
    theta: &ParamVector,
    u: &NoiseDraw,
    y_obs: &OutputVector,
    mask: &Mask,
) -> Result<DistanceValue> {
    check_schema(sim, theta, u)?;
    if y_obs.dim() != sim.output_dim() || mask.len() != sim.output_dim() {
        return Err(Error::Schema("observation or mask length mismatch".into()));
    }
    if !mask.any_active() {
        return Err(Error::NoInformativeDimensions);
    }
    let y = sim.simulate_raw(theta.values(), u);
    DistanceValue::new(masked_sq_distance(&y, y_obs.values(), mask.active()))
}

/// Same-masked squared distance over raw slices; hot path for the pipeline.
#[inline]
pub fn masked_sq_distance(y: &[f64], y_obs: &[f64], active: &[bool]) -> f64 {
    let mut s = 0.0;
    for k in 0..y.len() {
        if active[k] {
            let d = y[k] - y_obs[k];
            s += d * d;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensitivity::Mask;
    use crate::simulators::mog::{MogSimulator, MogVariant};

    fn mog_base_1d() -> MogSimulator {
        MogSimulator::new(1, MogVariant::Base, 0)
    }

    #[test]
    fn simulate_mog_base_mean_shift() {
        // y = θ + μ + σ z with μ = 1, σ = 0.2
        let sim = mog_base_1d();
        let theta = ParamVector::new(vec![0.0]).unwrap();
        let u = NoiseDraw::new(vec![0.0], vec![], vec![]);
        let y = simulate(&sim, &theta, &u).unwrap();
        assert_eq!(y.values(), &[1.0]);

        let theta = ParamVector::new(vec![-1.0]).unwrap();
        let y = simulate(&sim, &theta, &u).unwrap();
        assert_eq!(y.values(), &[0.0]);
    }

    #[test]
    fn simulate_two_mode_with_negative_selector() {
        let sim = MogSimulator::new(1, MogVariant::TwoModes, 0);
        let theta = ParamVector::new(vec![0.0]).unwrap();
        let u = NoiseDraw::new(vec![0.0], vec![-1], vec![]);
        let y = simulate(&sim, &theta, &u).unwrap();
        assert_eq!(y.values(), &[-1.0]);
    }

    #[test]
    fn simulate_is_deterministic() {
        let sim = MogSimulator::new(3, MogVariant::TwoModesDistractors, 0);
        let mut rng = crate::streams::substream(5, crate::streams::StreamKind::Noise, 0, 0);
        let u = sim.sample_noise(&mut rng);
        let theta = ParamVector::new(vec![0.3, -0.7, 1.1]).unwrap();
        let a = simulate(&sim, &theta, &u).unwrap();
        let b = simulate(&sim, &theta, &u).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn jacobian_of_base_is_identity() {
        let sim = MogSimulator::new(2, MogVariant::Base, 0);
        let theta = ParamVector::new(vec![0.4, -2.0]).unwrap();
        let u = NoiseDraw::new(vec![0.1, -0.3], vec![], vec![]);
        let j = jacobian(&sim, &theta, &u).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(j.get(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn finite_diff_matches_identity_jacobian() {
        let sim = MogSimulator::new(2, MogVariant::Base, 0);
        let theta = ParamVector::new(vec![0.4, -2.0]).unwrap();
        let u = NoiseDraw::new(vec![0.1, -0.3], vec![], vec![]);
        let j = finite_diff_jacobian(&sim, &theta, &u, 1e-5).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((j.get(r, c) - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn distractor_jacobian_rows_are_zero() {
        let sim = MogSimulator::new(2, MogVariant::BaseDistractors, 0);
        let theta = ParamVector::new(vec![0.4, -2.0]).unwrap();
        let mut rng = crate::streams::substream(5, crate::streams::StreamKind::Noise, 0, 1);
        let u = sim.sample_noise(&mut rng);
        let j = jacobian(&sim, &theta, &u).unwrap();
        for r in 2..20 {
            for c in 0..2 {
                assert_eq!(j.get(r, c), 0.0);
            }
        }
    }

    #[test]
    fn masked_distance_examples() {
        let sim = mog_base_1d();
        let theta = ParamVector::new(vec![0.0]).unwrap();
        let u = NoiseDraw::new(vec![0.0], vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0]).unwrap();
        let mask = Mask::full(1);
        // (0 + 1 − 0)² = 1
        let d = masked_distance(&sim, &theta, &u, &y_obs, &mask).unwrap();
        assert_eq!(d.value(), 1.0);

        // exact match gives zero
        let y_obs = OutputVector::new(vec![1.0]).unwrap();
        let d = masked_distance(&sim, &theta, &u, &y_obs, &mask).unwrap();
        assert_eq!(d.value(), 0.0);
    }

    #[test]
    fn masked_distance_drops_masked_dimensions() {
        // With distractor dims masked off, the distance equals the 2-dim base
        // distance on the informative coordinates.
        let sim = MogSimulator::new(2, MogVariant::BaseDistractors, 0);
        let base = MogSimulator::new(2, MogVariant::Base, 0);
        let theta = ParamVector::new(vec![0.2, -0.5]).unwrap();
        let mut rng = crate::streams::substream(9, crate::streams::StreamKind::Noise, 0, 0);
        let u = sim.sample_noise(&mut rng);
        let u_base = NoiseDraw::new(u.gaussian().to_vec(), vec![], vec![]);

        let mut active = vec![true, true];
        active.extend(vec![false; 18]);
        let mask = Mask::from_active(active);
        let y_obs = OutputVector::new(vec![0.0; 20]).unwrap();
        let y_obs_base = OutputVector::new(vec![0.0; 2]).unwrap();

        let d_masked = masked_distance(&sim, &theta, &u, &y_obs, &mask).unwrap();
        let d_base =
            masked_distance(&base, &theta, &u_base, &y_obs_base, &Mask::full(2)).unwrap();
        assert!((d_masked.value() - d_base.value()).abs() < 1e-15);
    }

    #[test]
    fn all_false_mask_is_rejected() {
        let sim = mog_base_1d();
        let theta = ParamVector::new(vec![0.0]).unwrap();
        let u = NoiseDraw::new(vec![0.0], vec![], vec![]);
        let y_obs = OutputVector::new(vec![0.0]).unwrap();
        let mask = Mask::from_active(vec![false]);
        let err = masked_distance(&sim, &theta, &u, &y_obs, &mask).unwrap_err();
        assert!(matches!(err, Error::NoInformativeDimensions));
    }

    #[test]
    fn dimension_mismatch_is_schema_error() {
        let sim = mog_base_1d();
        let theta = ParamVector::new(vec![0.0, 1.0]).unwrap();
        let u = NoiseDraw::new(vec![0.0], vec![], vec![]);
        assert!(matches!(simulate(&sim, &theta, &u), Err(Error::Schema(_))));
    }

    #[test]
    fn param_vector_rejects_bad_input() {
        assert!(ParamVector::new(vec![]).is_err());
        assert!(ParamVector::new(vec![f64::NAN]).is_err());
    }
}
