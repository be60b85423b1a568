//! The S-functional calculus.
//!
//! `f(T) = 1/(2 pi) * integral over dU_I of S^{-1}(s,T) ds_I f(s)`, with
//! `ds_I = ds (-I)`. On a circle `s = c + r e^{I theta}` this gives
//! `ds_I = r e^{I theta} d theta`, so each circle contributes
//! `1/(2 pi) * integral_0^{2 pi} S^{-1}(s,T) (r e^{I theta}) f(s) d theta`,
//! computed with the composite trapezoid rule.
//!
//! Operators with a real point `k` in the resolvent set are handled through
//! `A = (T - kI)^{-1}` and `phi(p) = f(p^{-1} + k)`, and cross-checked
//! against the direct formula `f(inf) I + integral over dU_I`, where `U` is
//! a neighbourhood of the spectrum together with infinity.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::contour::{build_contour_with, Circle, Contour, ContourOptions};
use crate::error::{Error, Result};
use crate::linalg::QuatMatrix;
use crate::quat::{ImaginaryUnit, Quaternion};
use crate::resolvent::s_resolvent;
use crate::slice_fn::{compose_with_inverse_transform, SliceFunction};
use crate::spectrum::{in_resolvent_set, s_spectrum, SpectralSphere, SpectrumReport};

pub const QUAD_TOL: f64 = 1e-10;
pub const MIN_NODES: usize = 64;
pub const MAX_NODES: usize = 16384;
/// How far the default `k` scan walks along the real axis.
pub const K_SCAN_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tol: QUAD_TOL, min_nodes: MIN_NODES, max_nodes: MAX_NODES }
    }
}

/// Options for the commands that build their own contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalcOptions {
    pub slice: ImaginaryUnit,
    pub quadrature: QuadratureOptions,
    /// Forces every circle to this radius (checked for admissibility).
    pub radius: Option<f64>,
    pub margin_scale: f64,
}

impl Default for CalcOptions {
    fn default() -> Self {
        Self { slice: ImaginaryUnit::I, quadrature: QuadratureOptions::default(), radius: None, margin_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculusResult {
    pub value: QuatMatrix,
    /// Last successive difference of the node-doubling sequence, floored
    /// at the roundoff level of the node evaluations.
    pub quadrature_error_estimate: f64,
    /// The contour, with `nodes_per_circle` set to the final level.
    pub contour: Contour,
    pub slice_unit: ImaginaryUnit,
}

impl Serialize for CalculusResult {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            value: &'a QuatMatrix,
            error_estimate: f64,
            slice: ImaginaryUnit,
            contour: &'a [Circle],
            nodes: usize,
        }
        Repr {
            value: &self.value,
            error_estimate: self.quadrature_error_estimate,
            slice: self.slice_unit,
            contour: &self.contour.circles,
            nodes: self.contour.nodes_per_circle,
        }
        .serialize(ser)
    }
}

type NodeFn<'a> = dyn Fn(Quaternion) -> Result<Quaternion> + Sync + 'a;

struct NodeValue {
    g: QuatMatrix,
    /// `cond(Q_s) * ||g||`, driving the roundoff floor.
    roundoff: f64,
}

fn eval_node(t: &QuatMatrix, f: &NodeFn, contour: &Contour, c: &Circle, theta: f64) -> Result<NodeValue> {
    let (s, e) = contour.node(c, theta);
    let w = e.scale(c.orientation as f64);
    let r = s_resolvent(t, s)?;
    let fs = f(s)?;
    let g = r.operator.scale_right(w).scale_right(fs);
    let roundoff = r.pencil_sigma_max / r.pencil_sigma_min * g.frobenius_norm();
    Ok(NodeValue { g, roundoff })
}

/// Trapezoid sums over all circles with node doubling; returns the value,
/// the error estimate and the final node count.
fn contour_integral(t: &QuatMatrix, f: &NodeFn, contour: &Contour, opts: &QuadratureOptions) -> Result<(QuatMatrix, f64, usize)> {
    let n0 = opts.min_nodes.max(4);
    let circles = &contour.circles;
    let mut sums = vec![QuatMatrix::zeros(t.n()); circles.len()];

    // evaluates nodes j = first, first + step, ... < count of a level with
    // `count` nodes, in parallel, then folds them in a fixed order
    let add_nodes = |sums: &mut Vec<QuatMatrix>, count: usize, first: usize, step: usize| -> Result<f64> {
        let jobs: Vec<(usize, usize)> =
            (0..circles.len()).flat_map(|ci| (first..count).step_by(step).map(move |j| (ci, j))).collect();
        let vals: Vec<NodeValue> = jobs
            .par_iter()
            .map(|&(ci, j)| eval_node(t, f, contour, &circles[ci], 2.0 * PI * j as f64 / count as f64))
            .collect::<Result<_>>()?;
        let mut roundoff: f64 = 0.0;
        for (&(ci, _), v) in jobs.iter().zip(&vals) {
            sums[ci] = &sums[ci] + &v.g;
            roundoff = roundoff.max(v.roundoff);
        }
        Ok(roundoff)
    };
    let total = |sums: &[QuatMatrix], count: usize| {
        sums.iter().fold(QuatMatrix::zeros(t.n()), |acc, s| &acc + s).scale_real(1.0 / count as f64)
    };

    let mut n = n0;
    let mut roundoff = add_nodes(&mut sums, n, 0, 1)?;
    let mut value = total(&sums, n);
    let mut diff = f64::INFINITY;
    while 2 * n <= opts.max_nodes {
        roundoff = roundoff.max(add_nodes(&mut sums, 2 * n, 1, 2)?);
        n *= 2;
        let next = total(&sums, n);
        diff = (&next - &value).frobenius_norm();
        value = next;
        let floor = f64::EPSILON * roundoff;
        if diff < opts.tol * (1.0 + value.frobenius_norm()) || diff <= 4.0 * floor {
            return Ok((value, diff.max(floor), n));
        }
    }
    Err(Error::QuadratureFailure { nodes: n, difference: diff })
}

/// Rejects contours that enclose a singularity of `f`.
fn check_singularities(f: &SliceFunction, contour: &Contour) -> Result<()> {
    for z in f.singularities() {
        for p in [z, z.conj()] {
            if contour.circles.iter().any(|c| c.orientation > 0 && (p - c.center).norm() <= c.radius) {
                return Err(Error::ContourInfeasible(format!(
                    "singularity {} + {}I of f lies inside the contour",
                    p.re, p.im
                )));
            }
        }
    }
    Ok(())
}

fn singular_quaternions(f: &SliceFunction) -> Vec<Quaternion> {
    f.singularities().into_iter().map(|z| Quaternion::new(z.re, z.im, 0.0, 0.0)).collect()
}

pub fn f_of_t(t: &QuatMatrix, f: &SliceFunction, contour: &Contour) -> Result<CalculusResult> {
    f_of_t_with(t, f, contour, &QuadratureOptions::default())
}

pub fn f_of_t_with(t: &QuatMatrix, f: &SliceFunction, contour: &Contour, opts: &QuadratureOptions) -> Result<CalculusResult> {
    check_singularities(f, contour)?;
    let eval = |s: Quaternion| f.eval(s);
    let (value, err, nodes) = contour_integral(t, &eval, contour, opts)?;
    let mut contour = contour.clone();
    contour.nodes_per_circle = nodes;
    Ok(CalculusResult { value, quadrature_error_estimate: err, slice_unit: contour.slice_unit, contour })
}

/// Contour around the spectrum of `t` avoiding the singularities of `f`.
pub fn auto_contour(spectrum: &SpectrumReport, f: &SliceFunction, opts: &CalcOptions) -> Result<Contour> {
    let excl = singular_quaternions(f);
    let copts = ContourOptions { margin_scale: opts.margin_scale, ..ContourOptions::for_norm(spectrum.norm_bound) };
    let mut contour = build_contour_with(spectrum, opts.slice, &excl, &copts)?;
    if let Some(r) = opts.radius {
        for c in &mut contour.circles {
            c.radius = r;
        }
        contour.check_admissible(spectrum, &excl)?;
    }
    Ok(contour)
}

/// `f(T)` on an automatically built contour.
pub fn f_of_t_auto(t: &QuatMatrix, f: &SliceFunction, opts: &CalcOptions) -> Result<CalculusResult> {
    let spectrum = s_spectrum(t)?;
    let contour = auto_contour(&spectrum, f, opts)?;
    f_of_t_with(t, f, &contour, &opts.quadrature)
}

/// Both routes of the unbounded-type calculus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnboundedResult {
    pub k: f64,
    /// `phi(A)` with `A = (T - kI)^{-1}`.
    pub transform: CalculusResult,
    /// `f(inf) I + integral` over small circles and a clockwise outer circle.
    pub direct: CalculusResult,
    /// Relative Frobenius difference of the two values.
    pub discrepancy: f64,
}

/// `ceil(||T||) + 1`, or the next integer beyond it that lies in the
/// resolvent set.
pub fn default_k(t: &QuatMatrix) -> Result<f64> {
    let start = t.op_norm().ceil() + 1.0;
    for step in 0..K_SCAN_STEPS {
        let k = start + step as f64;
        if in_resolvent_set(t, Quaternion::real(k)).in_resolvent_set {
            return Ok(k);
        }
    }
    Err(Error::NoRealResolventPoint { start, steps: K_SCAN_STEPS })
}

/// `A = (T - kI)^{-1}`; fails unless `k` is in the resolvent set.
pub fn transformed_operator(t: &QuatMatrix, k: f64) -> Result<QuatMatrix> {
    let cert = in_resolvent_set(t, Quaternion::real(k));
    if !cert.in_resolvent_set {
        return Err(Error::NotInResolventSet { sigma_min: cert.sigma_min });
    }
    t.sub_scalar(Quaternion::real(k)).invert()
}

pub fn f_of_t_unbounded(t: &QuatMatrix, f: &SliceFunction, k: Option<f64>) -> Result<UnboundedResult> {
    f_of_t_unbounded_with(t, f, k, &CalcOptions::default())
}

pub fn f_of_t_unbounded_with(t: &QuatMatrix, f: &SliceFunction, k: Option<f64>, opts: &CalcOptions) -> Result<UnboundedResult> {
    let f_inf = f
        .value_at_infinity()
        .ok_or_else(|| Error::Contract("the unbounded calculus needs a declared f(inf)".into()))?;
    let k = match k {
        Some(k) => k,
        None => default_k(t)?,
    };
    let a = transformed_operator(t, k)?;
    let phi = compose_with_inverse_transform(f, k)?;
    let transform = f_of_t_auto(&a, &phi, opts)?;

    let spectrum = s_spectrum(t)?;
    let mut contour = auto_contour(&spectrum, f, opts)?;
    let reach = contour
        .circles
        .iter()
        .map(|c| c.center.norm() + c.radius)
        .chain(f.singularities().iter().map(|z| z.norm()))
        .fold(t.op_norm(), f64::max);
    contour.circles.push(Circle { center: Default::default(), radius: 2.0 * reach + 1.0, orientation: -1 });
    let mut direct = f_of_t_with(t, f, &contour, &opts.quadrature)?;
    direct.value = direct.value.add_scalar(f_inf);

    let discrepancy = transform.value.rel_diff(&direct.value);
    Ok(UnboundedResult { k, transform, direct, discrepancy })
}

/// `Phi(x + yI) = (x + yI - k)^{-1}` on spheres: `((x - k)/d^2, y/d^2)` with
/// `d^2 = (x - k)^2 + y^2`.
pub fn phi_spheres(spectrum: &SpectrumReport, k: f64) -> Vec<SpectralSphere> {
    let mut out: Vec<SpectralSphere> = spectrum
        .spheres
        .iter()
        .map(|sp| {
            let d2 = (sp.x - k).powi(2) + sp.y * sp.y;
            SpectralSphere { x: (sp.x - k) / d2, y: sp.y / d2, multiplicity: sp.multiplicity }
        })
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformResidual {
    /// `|| S^{-1}(s,T) - (pI - S^{-1}(p,A) p^2) ||`
    pub relation: f64,
    /// `|| S^{-1}(s,T) + A S^{-1}(p,A) p ||`
    pub companion: f64,
}

pub fn transform_identity_residual(t: &QuatMatrix, s: Quaternion, k: f64) -> Result<TransformResidual> {
    let sk = s - Quaternion::real(k);
    if sk == Quaternion::ZERO {
        return Err(Error::Domain("s must differ from k".into()));
    }
    let a = transformed_operator(t, k)?;
    let p = sk.inverse()?;
    let lhs = s_resolvent(t, s)?.operator;
    let sp = s_resolvent(&a, p)?.operator;
    let rel = QuatMatrix::scalar(t.n(), p).try_sub(&sp.scale_right(p * p))?;
    let comp = -&(&a * &sp).scale_right(p);
    Ok(TransformResidual { relation: (&lhs - &rel).op_norm(), companion: (&lhs - &comp).op_norm() })
}

/// Absolute residual of one identity and the size of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    /// `None` when a denominator degenerates.
    pub residual: Option<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaResiduals {
    /// `Re[s] |p|^2 = k |p|^2 + Re[p]`
    pub real_part: IdentityResidual,
    /// `|p|^2 |s|^2 = k^2 |p|^2 + 2 Re[p] k + 1`
    pub norm_sqr: IdentityResidual,
    /// `d conj(p) / |p|^2 = -p^{-2}` with `d = 2k - 2Re[s] + conj(p)^{-1}`
    pub inverse_square: IdentityResidual,
    /// `(conj(s) + m d^{-1}) d conj(p) = 0` with
    /// `m = |s|^2 - k^2 - k conj(p)^{-1}`
    pub vanishing: IdentityResidual,
}

impl LemmaResiduals {
    pub fn all(&self) -> [IdentityResidual; 4] {
        [self.real_part, self.norm_sqr, self.inverse_square, self.vanishing]
    }
}

/// The identities relating `s`, `k` and `p = (s - k)^{-1}`, evaluated
/// literally with quaternion arithmetic.
pub fn lemma_identities_residual(s: Quaternion, k: f64) -> Result<LemmaResiduals> {
    let kq = Quaternion::real(k);
    let p = (s - kq).inverse().map_err(|_| Error::Domain("s must differ from k".into()))?;
    let (s0, p0) = (s.re(), p.re());
    let p2 = p.norm_sqr();
    let s2 = s.norm_sqr();

    let real_part = IdentityResidual {
        residual: Some((s0 * p2 - (k * p2 + p0)).abs()),
        scale: 1.0 + (s0 * p2).abs() + (k * p2).abs() + p0.abs(),
    };
    let norm_sqr = IdentityResidual {
        residual: Some((p2 * s2 - (k * k * p2 + 2.0 * p0 * k + 1.0)).abs()),
        scale: 2.0 + p2 * s2 + k * k * p2 + (2.0 * p0 * k).abs(),
    };

    let pbar = p.conj();
    let pbar_inv = pbar.inverse()?;
    let d = Quaternion::real(2.0 * k - 2.0 * s0) + pbar_inv;
    let degenerate = d.norm() <= 1e-12 * (1.0 + s.norm() + k.abs());

    let inverse_square = if degenerate {
        IdentityResidual { residual: None, scale: 0.0 }
    } else {
        let lhs = d * pbar.scale(1.0 / p2);
        let rhs = -(p * p).inverse()?;
        IdentityResidual { residual: Some(lhs.dist(rhs)), scale: 1.0 + lhs.norm() + rhs.norm() }
    };
    let vanishing = if degenerate {
        IdentityResidual { residual: None, scale: 0.0 }
    } else {
        let m = Quaternion::real(s2 - k * k) - pbar_inv.scale(k);
        let bracket = s.conj() + m * d.inverse()?;
        let lhs = bracket * d * pbar;
        let scale = 1.0 + (s.norm() + m.norm() / d.norm()) * d.norm() * pbar.norm();
        IdentityResidual { residual: Some(lhs.norm()), scale }
    };
    Ok(LemmaResiduals { real_part, norm_sqr, inverse_square, vanishing })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSeriesOptions {
    pub n_max: usize,
    /// The imaginary axis is truncated to `[-R I, R I]`.
    pub axis_r: f64,
    /// Trapezoid intervals on the truncated axis.
    pub nodes: usize,
    pub slice: ImaginaryUnit,
}

impl Default for InverseSeriesOptions {
    fn default() -> Self {
        Self { n_max: 40, axis_r: 100.0, nodes: 4096, slice: ImaginaryUnit::I }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseSeriesResult {
    pub value: QuatMatrix,
    pub n_max: usize,
    pub axis_r: f64,
    pub nodes: usize,
    /// `F_n(f)` for `n < n_max`.
    pub moments: Vec<Quaternion>,
    /// Norm of the last term `T^{-n_max} F_{n_max - 1}`.
    pub last_term_norm: f64,
}

/// `F_n(f) = -1/(2 pi) * integral over I R of (Im s)^n ds_I f(s)`. The
/// axis is traversed downward as part of the boundary of the right half
/// disk, and `ds_I = dt` for `s = I t`, so
/// `F_n = 1/(2 pi) * integral_{-R}^{R} (I t)^n f(I t) dt`.
pub fn inverse_series_moments(f: &SliceFunction, opts: &InverseSeriesOptions) -> Result<Vec<Quaternion>> {
    let unit = opts.slice.quaternion();
    let h = 2.0 * opts.axis_r / opts.nodes as f64;
    let mut moments = vec![Quaternion::ZERO; opts.n_max];
    for m in 0..=opts.nodes {
        let tm = -opts.axis_r + h * m as f64;
        let w = if m == 0 || m == opts.nodes { 0.5 * h } else { h } / (2.0 * PI);
        let it = unit.scale(tm);
        let fv = f.eval(it)?;
        let mut pow = Quaternion::ONE;
        for (n, mom) in moments.iter_mut().enumerate() {
            if n > 0 {
                pow = pow * it;
            }
            *mom += (pow * fv).scale(w);
        }
    }
    Ok(moments)
}

/// `sum_{n < n_max} T^{-n-1} F_n(f)`, for `T` invertible with spectrum in
/// `Re > 0` and `f(inf) = 0`. The exchange of sum and integral behind this
/// expansion needs `|Im s| ||T^{-1}|| < 1` on the axis, so the partial sums
/// are only meaningful as a diagnostic.
pub fn f_of_t_inverse_series(t: &QuatMatrix, f: &SliceFunction, opts: &InverseSeriesOptions) -> Result<InverseSeriesResult> {
    if f.value_at_infinity() != Some(Quaternion::ZERO) {
        return Err(Error::Contract("the inverse-power expansion needs f(inf) = 0".into()));
    }
    let tinv = t.invert()?;
    let spectrum = s_spectrum(t)?;
    if let Some(sp) = spectrum.spheres.iter().find(|sp| !(sp.x > 0.0)) {
        return Err(Error::Domain(format!("spectral sphere ({}, {}) is not in Re > 0", sp.x, sp.y)));
    }
    let moments = inverse_series_moments(f, opts)?;
    let mut value = QuatMatrix::zeros(t.n());
    let mut pow = QuatMatrix::identity(t.n());
    let mut last_term_norm = 0.0;
    for mom in &moments {
        pow = &pow * &tinv;
        let term = pow.scale_right(*mom);
        last_term_norm = term.op_norm();
        value = &value + &term;
    }
    Ok(InverseSeriesResult {
        value,
        n_max: opts.n_max,
        axis_r: opts.axis_r,
        nodes: opts.nodes,
        moments,
        last_term_norm,
    })
}
