//! Hyperbox surrogates for acceptance regions.
//!
//! Around each optimization end point θ* we build an oriented box whose axes
//! are the eigenvectors of JᵀJ at θ*. Along each axis (both directions
//! independently) a coarse-to-fine line search walks outward until the
//! distance exceeds ε, steps back, halves the step and repeats, which
//! resolves the boundary to within η·2^{1−R}. The box then carries a uniform
//! proposal distribution.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Mat};
use crate::core::{unit_f64, ParamVector};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Line-search settings: initial step η, step cap L, refinement rounds R.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    pub step: f64,
    pub max_steps: usize,
    pub refinements: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self { step: 0.1, max_steps: 100, refinements: 1 }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || self.max_steps < 1 || self.refinements < 1 {
            return Err(Error::Config("line search needs step > 0, L >= 1, R >= 1".into()));
        }
        Ok(())
    }

    /// Smallest resolvable extent; a box face never collapses below this.
    pub fn extent_floor(&self) -> f64 {
        self.step * 0.5f64.powi(self.refinements as i32)
    }
}

/// Orthonormal axis frame, stored with axes as rows for contiguous access.
/// Boxes built from one Jacobian share a frame through an [`Arc`], which
/// both bounds memory at image scale and lets the mixture density project
/// a point into each distinct frame once instead of once per box.
#[derive(Debug, PartialEq)]
pub struct AxisFrame {
    /// Vᵀ: row d is axis d.
    vt: Mat,
}

impl AxisFrame {
    /// Build from V with axes as columns; checks orthonormality.
    pub fn from_axes(axes: Mat) -> Result<Arc<Self>> {
        let defect = axes.orthonormality_defect();
        if defect > 1e-8 {
            return Err(Error::Schema(format!("axes not orthonormal (defect {defect:.3e})")));
        }
        let n = axes.rows();
        let mut vt = Mat::zeros(axes.cols(), n);
        for r in 0..n {
            for c in 0..axes.cols() {
                vt.set(c, r, axes.get(r, c));
            }
        }
        Ok(Arc::new(Self { vt }))
    }

    pub fn identity(dim: usize) -> Arc<Self> {
        Arc::new(Self { vt: Mat::identity(dim) })
    }

    pub fn dim(&self) -> usize {
        self.vt.rows()
    }

    /// Axis d as a contiguous slice.
    pub fn axis(&self, d: usize) -> &[f64] {
        self.vt.row(d)
    }

    /// Vᵀ x: coordinates of x in the frame.
    pub fn to_frame(&self, x: &[f64]) -> Vec<f64> {
        self.vt.matvec(x)
    }

    /// V t: map frame coordinates back to parameter space.
    pub fn from_frame(&self, t: &[f64]) -> Vec<f64> {
        self.vt.t_matvec(t)
    }

    /// V with axes as columns (reconstructed; for inspection and export).
    pub fn axes_matrix(&self) -> Mat {
        let n = self.vt.rows();
        let mut v = Mat::zeros(self.vt.cols(), n);
        for d in 0..n {
            for r in 0..self.vt.cols() {
                v.set(r, d, self.vt.get(d, r));
            }
        }
        v
    }
}

/// Oriented box: shared axis frame, center θ*, and per-direction extents
/// (h⁻, h⁺), both strictly positive.
#[derive(Clone, Debug)]
pub struct Hyperbox {
    center: Vec<f64>,
    frame: Arc<AxisFrame>,
    /// Vᵀ·center, precomputed for O(D) membership tests.
    center_frame: Vec<f64>,
    neg_extents: Vec<f64>,
    pos_extents: Vec<f64>,
    log_volume: f64,
    eigen_fallback: bool,
}

impl Hyperbox {
    pub fn new(
        center: Vec<f64>,
        axes: Mat,
        neg_extents: Vec<f64>,
        pos_extents: Vec<f64>,
        eigen_fallback: bool,
    ) -> Result<Self> {
        let frame = AxisFrame::from_axes(axes)?;
        Self::with_frame(center, frame, neg_extents, pos_extents, eigen_fallback)
    }

    pub fn with_frame(
        center: Vec<f64>,
        frame: Arc<AxisFrame>,
        neg_extents: Vec<f64>,
        pos_extents: Vec<f64>,
        eigen_fallback: bool,
    ) -> Result<Self> {
        let d = center.len();
        if frame.dim() != d || neg_extents.len() != d || pos_extents.len() != d {
            return Err(Error::Schema("hyperbox dimensions disagree".into()));
        }
        if neg_extents.iter().chain(&pos_extents).any(|e| !(*e > 0.0)) {
            return Err(Error::Schema("extents must be strictly positive".into()));
        }
        // volumes live in log space: a product of hundreds of sub-unit side
        // lengths underflows f64 long before the box is degenerate
        let log_volume = neg_extents.iter().zip(&pos_extents).map(|(a, b)| (a + b).ln()).sum();
        let center_frame = frame.to_frame(&center);
        Ok(Self {
            center,
            frame,
            center_frame,
            neg_extents,
            pos_extents,
            log_volume,
            eigen_fallback,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn frame(&self) -> &Arc<AxisFrame> {
        &self.frame
    }

    /// V with axes as columns.
    pub fn axes(&self) -> Mat {
        self.frame.axes_matrix()
    }

    pub fn neg_extents(&self) -> &[f64] {
        &self.neg_extents
    }

    pub fn pos_extents(&self) -> &[f64] {
        &self.pos_extents
    }

    /// exp of [`Hyperbox::log_volume`]; may underflow in high dimension.
    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }

    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    pub fn eigen_fallback(&self) -> bool {
        self.eigen_fallback
    }

    /// Membership given the point's frame coordinates Vᵀθ.
    pub fn contains_frame_coords(&self, theta_frame: &[f64]) -> bool {
        theta_frame
            .iter()
            .zip(&self.center_frame)
            .zip(self.neg_extents.iter().zip(&self.pos_extents))
            .all(|((t, c), (lo, hi))| {
                let rel = t - c;
                rel >= -lo && rel <= *hi
            })
    }
}

impl PartialEq for Hyperbox {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center
            && self.frame.vt == other.frame.vt
            && self.neg_extents == other.neg_extents
            && self.pos_extents == other.pos_extents
    }
}

/// Closed-box membership: faces count as inside.
pub fn box_contains(b: &Hyperbox, theta: &[f64]) -> bool {
    debug_assert_eq!(theta.len(), b.dim());
    b.contains_frame_coords(&b.frame.to_frame(theta))
}

/// Uniform density: 1/volume inside the box, zero outside.
pub fn box_density(b: &Hyperbox, theta: &[f64]) -> f64 {
    if box_contains(b, theta) {
        (-b.log_volume).exp()
    } else {
        0.0
    }
}

/// Uniform draw: sample per-axis coordinates, then map back through V.
pub fn sample_box(b: &Hyperbox, rng: &mut dyn RngCore) -> ParamVector {
    let mut coords = vec![0.0; b.dim()];
    for d in 0..b.dim() {
        let lo = -b.neg_extents[d];
        let hi = b.pos_extents[d];
        coords[d] = lo + unit_f64(rng) * (hi - lo);
    }
    let mut theta = b.frame.from_frame(&coords);
    for (t, c) in theta.iter_mut().zip(&b.center) {
        *t += c;
    }
    ParamVector::new(theta).expect("box sample is finite")
}

/// Eigendecomposition of the symmetric matrix JᵀJ by cyclic Jacobi sweeps.
///
/// Returns `(V, eigenvalues, converged)` with columns of V orthonormal,
/// sorted by descending eigenvalue, and a deterministic sign convention
/// (first component of magnitude above 1e-12 made positive). On
/// non-convergence after the sweep cap the caller falls back to identity
/// axes.
pub fn jacobi_eigen(g: &Mat) -> (Mat, Vec<f64>, bool) {
    const OFF_DIAG_TOL: f64 = 1e-10;
    const MAX_SWEEPS: usize = 100;
    let n = g.rows();
    assert_eq!(n, g.cols());

    let mut a = g.clone();
    let mut v = Mat::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        if off < OFF_DIAG_TOL {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() < OFF_DIAG_TOL * 1e-3 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e12 {
                    0.5 / theta
                } else {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // rotate rows/columns p and q of A
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        converged = off < OFF_DIAG_TOL;
    }

    let mut eigs: Vec<(f64, usize)> = (0..n).map(|i| (a.get(i, i), i)).collect();
    // descending eigenvalue, original column order on ties
    eigs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));

    let mut sorted = Mat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, (lambda, src)) in eigs.iter().enumerate() {
        values.push(*lambda);
        let mut col: Vec<f64> = (0..n).map(|r| v.get(r, *src)).collect();
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in &mut col {
                    *x = -*x;
                }
            }
        }
        for r in 0..n {
            sorted.set(r, dst, col[r]);
        }
    }
    (sorted, values, converged)
}

/// Orthonormal axes for the hyperbox: eigenvectors of JᵀJ, descending
/// eigenvalue, deterministic signs. Falls back to the identity frame (with
/// the flag set) if the sweep cap is hit.
pub fn eigen_axes(j: &Mat) -> Result<(Mat, bool)> {
    if !j.is_finite() {
        return Err(Error::NonFinite("Jacobian for eigen axes".into()));
    }
    let (v, _, converged) = jacobi_eigen(&j.gram());
    if converged {
        Ok((v, false))
    } else {
        Ok((Mat::identity(j.cols()), true))
    }
}

/// Walk from θ* along the unit direction v until d > ε or the step cap,
/// back off one step, halve η, and continue from there; the coarse pass is
/// followed by R refinement rounds, so the boundary is resolved to within
/// η·2^{−R}. Returns the distance walked, floored at
/// [`LineSearchParams::extent_floor`], plus the number of distance
/// evaluations spent.
pub fn directional_endpoint(
    d_fn: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    direction: &[f64],
    params: &LineSearchParams,
    epsilon: f64,
) -> (f64, usize) {
    debug_assert!((dot(direction, direction).sqrt() - 1.0).abs() < 1e-6, "direction must be unit");
    debug_assert!(epsilon > 0.0);

    let mut eta = params.step;
    let mut offset = 0.0f64; // walked arc length from the center
    let mut evals = 0usize;
    let mut point = center.to_vec();
    // the acceptance region is closed (d ≤ ε); absorb one-ulp boundary noise
    let threshold = epsilon * (1.0 + 1e-12);

    for _ in 0..=params.refinements {
        let mut l = 0usize;
        loop {
            l += 1;
            offset += eta;
            axpy(&mut point, eta, direction);
            evals += 1;
            let d = d_fn(&point);
            if d > threshold || l == params.max_steps {
                break;
            }
        }
        offset -= eta;
        axpy(&mut point, -eta, direction);
        eta *= 0.5;
    }

    (offset.max(params.extent_floor()), evals)
}

/// Outcome of assembling one hyperbox, with the line-search evaluation count
/// for budget accounting.
pub struct BoxBuild {
    pub hyperbox: Hyperbox,
    pub distance_evals: usize,
}

/// Build the hyperbox around θ*: eigen axes of JᵀJ, then a positive and a
/// negative extent per axis from independent line searches.
pub fn build_hyperbox(
    d_fn: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    j: &Mat,
    params: &LineSearchParams,
    epsilon: f64,
) -> Result<BoxBuild> {
    let (axes, fallback) = eigen_axes(j)?;
    build_hyperbox_with_axes(d_fn, center, AxisFrame::from_axes(axes)?, fallback, params, epsilon)
}

/// Same as [`build_hyperbox`] but with a precomputed frame (the frame of a
/// constant Jacobian is shared across records).
pub fn build_hyperbox_with_axes(
    d_fn: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    frame: Arc<AxisFrame>,
    eigen_fallback: bool,
    params: &LineSearchParams,
    epsilon: f64,
) -> Result<BoxBuild> {
    params.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let d = center.len();
    let mut neg = vec![0.0; d];
    let mut pos = vec![0.0; d];
    let mut evals = 0usize;
    let mut flipped = vec![0.0; d];
    for k in 0..d {
        let axis = frame.axis(k);
        let (hi, e1) = directional_endpoint(d_fn, center, axis, params, epsilon);
        for (f, a) in flipped.iter_mut().zip(axis) {
            *f = -a;
        }
        let (lo, e2) = directional_endpoint(d_fn, center, &flipped, params, epsilon);
        pos[k] = hi;
        neg[k] = lo;
        evals += e1 + e2;
    }
    let hyperbox = Hyperbox::with_frame(center.to_vec(), frame, neg, pos, eigen_fallback)?;
    Ok(BoxBuild { hyperbox, distance_evals: evals })
}
