//! S-resolvent operators.
//!
//! A quaternion `s` acting as an operator is the diagonal matrix `sI`, so
//! `A s` scales `A` from the right and `s A` from the left. Factor order is
//! kept exactly as in the formulas throughout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::QuatMatrix;
use crate::quat::Quaternion;
use crate::spectrum::{in_resolvent_set, pencil};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventValue {
    pub operator: QuatMatrix,
    pub s: Quaternion,
    pub pencil_sigma_min: f64,
    pub pencil_sigma_max: f64,
    /// Relative gap between `-Q^{-1}(T - conj(s))` and the commuted form
    /// `-(T Q^{-1} - Q^{-1} conj(s))`.
    pub commuted_residual: f64,
}

/// A truncated series with a rigorous bound on the discarded tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncated {
    pub value: QuatMatrix,
    pub terms: usize,
    pub ratio: f64,
    pub tail_bound: f64,
}

/// `S^{-1}(s,T) = -Q_s(T)^{-1} (T - conj(s) I)`.
pub fn s_resolvent(t: &QuatMatrix, s: Quaternion) -> Result<ResolventValue> {
    let cert = in_resolvent_set(t, s);
    if !cert.in_resolvent_set {
        return Err(Error::NotInResolventSet { sigma_min: cert.sigma_min });
    }
    let qinv = pencil(t, s)
        .lu_inverse()
        .ok_or(Error::NotInResolventSet { sigma_min: cert.sigma_min })??;
    let operator = -&(&qinv * &t.sub_scalar(s.conj()));
    let commuted = -&(&(t * &qinv) - &qinv.scale_right(s.conj()));
    let commuted_residual = operator.rel_diff(&commuted);
    Ok(ResolventValue {
        operator,
        s,
        pencil_sigma_min: cert.sigma_min,
        pencil_sigma_max: cert.sigma_max,
        commuted_residual,
    })
}

/// `sum_{n < terms} T^n s^{-1-n}`, valid for `||T|| < |s|`.
pub fn s_resolvent_series(t: &QuatMatrix, s: Quaternion, terms: usize) -> Result<Truncated> {
    let tn = t.op_norm();
    let sn = s.norm();
    let ratio = tn / sn;
    if !(tn < sn) {
        return Err(Error::Divergent { ratio });
    }
    let sinv = s.inverse()?;
    let mut value = QuatMatrix::zeros(t.n());
    let mut tpow = QuatMatrix::identity(t.n());
    let mut spow = sinv;
    for n in 0..terms {
        if n > 0 {
            tpow = &tpow * t;
            spow = spow * sinv;
        }
        value = &value + &tpow.scale_right(spow);
    }
    let tail_bound = ratio.powi(terms as i32) / (sn - tn);
    Ok(Truncated { value, terms, ratio, tail_bound })
}

/// `S(s,T) = (T - conj(s))^{-1} s (T - conj(s)) - T`, the inverse of the
/// S-resolvent.
pub fn s_left_inverse(t: &QuatMatrix, s: Quaternion) -> Result<QuatMatrix> {
    let m = t.sub_scalar(s.conj());
    let minv = m.invert()?;
    Ok(&(&minv * &m.scale_left(s)) - t)
}

/// `|| S^{-1}(s,T) s - T S^{-1}(s,T) - I ||` in the operator norm.
pub fn resolvent_equation_residual(t: &QuatMatrix, s: Quaternion) -> Result<f64> {
    let r = s_resolvent(t, s)?.operator;
    let lhs = &(&r.scale_right(s) - &(t * &r)) - &QuatMatrix::identity(t.n());
    Ok(lhs.op_norm())
}

/// `sum_{n < terms} (Re[s] I - T)^{-n-1} (Re[s] - s)^n`, valid when
/// `|Im[s]| ||(Re[s] I - T)^{-1}|| < 1`.
pub fn s_resolvent_laurent(t: &QuatMatrix, s: Quaternion, terms: usize) -> Result<Truncated> {
    let b = QuatMatrix::scalar(t.n(), Quaternion::real(s.re())).try_sub(t)?.invert()?;
    let bn = b.op_norm();
    let ratio = s.im_norm() * bn;
    if !(ratio < 1.0) {
        return Err(Error::Divergent { ratio });
    }
    let d = Quaternion::real(s.re()) - s;
    let mut value = QuatMatrix::zeros(t.n());
    let mut bpow = b.clone();
    let mut dpow = Quaternion::ONE;
    for n in 0..terms {
        if n > 0 {
            bpow = &bpow * &b;
            dpow = dpow * d;
        }
        value = &value + &bpow.scale_right(dpow);
    }
    let tail_bound = bn * ratio.powi(terms as i32) / (1.0 - ratio);
    Ok(Truncated { value, terms, ratio, tail_bound })
}
