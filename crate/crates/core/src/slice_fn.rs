//! Slice regular functions.
//!
//! Power series carry their coefficients on the right, `f(q) = sum q^n a_n`,
//! which makes them left slice regular. Rational functions are limited to
//! real coefficients (intrinsic functions): they map every slice `L_I` into
//! itself and are evaluated there as ordinary complex functions.
//!
//! A function may declare its value at infinity. The unbounded calculus
//! needs it, and it is only derived analytically (rational functions with
//! `deg num <= deg den`, constants). [`SliceFunction::estimate_value_at_infinity`]
//! is the explicit numerical alternative.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{ImaginaryUnit, Quaternion};

/// Maximum number of series terms summed by [`SliceFunction::eval`].
pub const MAX_SERIES_TERMS: usize = 500;
/// Relative tail tolerance for adaptive series truncation.
pub const SERIES_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum SliceKind {
    /// `sum q^n a_n`, finitely many terms.
    Polynomial(Vec<Quaternion>),
    /// `sum (q - center)^n a_n` on `|q - center| < radius`.
    PowerSeries { coeffs: Vec<Quaternion>, center: f64, radius: f64 },
    /// `num(q) / den(q)` with real coefficients, ascending powers.
    IntrinsicRational { num: Vec<f64>, den: Vec<f64> },
    Exp,
    /// `(q - alpha)^{-1}`.
    ResolventShift(f64),
    /// `inner(q^{-1} + k)`, with the value at `q = 0` taken from
    /// `inner`'s value at infinity.
    Transformed { inner: Box<SliceFunction>, k: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionSpec", into = "FunctionSpec")]
pub struct SliceFunction {
    kind: SliceKind,
    value_at_infinity: Option<Quaternion>,
}

impl SliceFunction {
    pub fn polynomial(coeffs: Vec<Quaternion>) -> Self {
        let value_at_infinity = match coeffs.iter().rposition(|a| *a != Quaternion::ZERO) {
            None => Some(Quaternion::ZERO),
            Some(0) => Some(coeffs[0]),
            Some(_) => None,
        };
        Self { kind: SliceKind::Polynomial(coeffs), value_at_infinity }
    }

    /// Polynomial with real coefficients.
    pub fn real_polynomial(coeffs: &[f64]) -> Self {
        Self::polynomial(coeffs.iter().map(|c| Quaternion::real(*c)).collect())
    }

    pub fn constant(c: Quaternion) -> Self {
        Self::polynomial(vec![c])
    }

    /// `q^m`.
    pub fn monomial(m: usize) -> Self {
        let mut c = vec![Quaternion::ZERO; m + 1];
        c[m] = Quaternion::ONE;
        Self::polynomial(c)
    }

    pub fn power_series(coeffs: Vec<Quaternion>, center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(Error::Input(format!("invalid disk of convergence ({center}, {radius})")));
        }
        Ok(Self { kind: SliceKind::PowerSeries { coeffs, center, radius }, value_at_infinity: None })
    }

    pub fn intrinsic_rational(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        let num = trim(num);
        let den = trim(den);
        if den.is_empty() {
            return Err(Error::Input("rational function with zero denominator".into()));
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::Input("non-finite rational coefficient".into()));
        }
        let value_at_infinity = if num.len() < den.len() {
            Some(Quaternion::ZERO)
        } else if num.len() == den.len() {
            Some(Quaternion::real(num[num.len() - 1] / den[den.len() - 1]))
        } else {
            None
        };
        Ok(Self { kind: SliceKind::IntrinsicRational { num, den }, value_at_infinity })
    }

    /// The exponential. Not regular at infinity.
    pub fn exp() -> Self {
        Self { kind: SliceKind::Exp, value_at_infinity: None }
    }

    /// `(q - alpha)^{-1}`, which vanishes at infinity.
    pub fn resolvent_shift(alpha: f64) -> Self {
        Self { kind: SliceKind::ResolventShift(alpha), value_at_infinity: Some(Quaternion::ZERO) }
    }

    pub fn kind(&self) -> &SliceKind {
        &self.kind
    }

    pub fn value_at_infinity(&self) -> Option<Quaternion> {
        self.value_at_infinity
    }

    /// Declares `f(infinity)`. Rejected for functions known not to be
    /// regular at infinity, and for values contradicting the analytic limit.
    pub fn with_value_at_infinity(mut self, v: Quaternion) -> Result<Self> {
        match (&self.kind, self.value_at_infinity) {
            (SliceKind::Exp, _) => {
                return Err(Error::Contract("exp is not regular at infinity".into()));
            }
            (SliceKind::Polynomial(_), None) => {
                return Err(Error::Contract("non-constant polynomial is not regular at infinity".into()));
            }
            (SliceKind::IntrinsicRational { .. }, None) => {
                return Err(Error::Contract("rational function with deg num > deg den is not regular at infinity".into()));
            }
            (_, Some(known)) if known.dist(v) > 1e-12 * (1.0 + known.norm()) => {
                return Err(Error::Contract(format!("declared f(inf) = {v} but the limit is {known}")));
            }
            _ => {}
        }
        self.value_at_infinity = Some(v);
        Ok(self)
    }

    /// Opt-in numerical limit: averages `f` over probes with `|q| = 1e6`
    /// on four slices.
    pub fn estimate_value_at_infinity(&self) -> Result<Quaternion> {
        const R: f64 = 1e6;
        let units = probe_units();
        let mut acc = Quaternion::ZERO;
        let mut count = 0.0;
        for u in units {
            for k in 0..8 {
                let th = 2.0 * PI * (k as f64 + 0.5) / 8.0;
                let q = Quaternion::from_slice(Complex::from_polar(R, th), u);
                acc += self.eval(q)?;
                count += 1.0;
            }
        }
        Ok(acc.scale(1.0 / count))
    }

    /// Whether the function has real coefficients, hence maps each slice to
    /// itself.
    pub fn is_intrinsic(&self) -> bool {
        match &self.kind {
            SliceKind::Polynomial(c) | SliceKind::PowerSeries { coeffs: c, .. } => c.iter().all(|a| a.is_real()),
            SliceKind::IntrinsicRational { .. } | SliceKind::Exp | SliceKind::ResolventShift(_) => true,
            SliceKind::Transformed { inner, .. } => inner.is_intrinsic(),
        }
    }

    pub fn eval(&self, q: Quaternion) -> Result<Quaternion> {
        match &self.kind {
            SliceKind::Polynomial(c) => {
                let mut acc = Quaternion::ZERO;
                let mut pow = Quaternion::ONE;
                for (n, a) in c.iter().enumerate() {
                    if n > 0 {
                        pow = pow * q;
                    }
                    acc += pow * *a;
                }
                Ok(acc)
            }
            SliceKind::PowerSeries { coeffs, center, radius } => {
                let d = q - Quaternion::real(*center);
                if !(d.norm() < *radius) {
                    return Err(Error::Domain(format!("|q - {center}| = {} outside radius {radius}", d.norm())));
                }
                sum_series(coeffs, d)
            }
            SliceKind::IntrinsicRational { num, den } => {
                let p = q.decompose();
                let z = p.to_complex();
                let d = horner(den, z);
                if d == Complex::new(0.0, 0.0) {
                    return Err(Error::Domain(format!("{q} is a pole")));
                }
                Ok(Quaternion::from_slice(horner(num, z) / d, p.unit))
            }
            SliceKind::Exp => {
                let p = q.decompose();
                Ok(Quaternion::from_slice(p.to_complex().exp(), p.unit))
            }
            SliceKind::ResolventShift(alpha) => {
                let d = q - Quaternion::real(*alpha);
                d.inverse().map_err(|_| Error::Domain(format!("{q} is the pole {alpha}")))
            }
            SliceKind::Transformed { inner, k } => {
                if q == Quaternion::ZERO {
                    return inner.value_at_infinity.ok_or_else(|| {
                        Error::Domain("transformed function at 0 needs the inner value at infinity".into())
                    });
                }
                inner.eval(q.inverse()? + Quaternion::real(*k))
            }
        }
    }

    /// Isolated singular points, one per sphere, as `a + b i` with `b >= 0`.
    /// Power series report none; their domain is checked at evaluation time.
    pub fn singularities(&self) -> Vec<Complex<f64>> {
        let mut out = match &self.kind {
            SliceKind::Polynomial(_) | SliceKind::PowerSeries { .. } | SliceKind::Exp => Vec::new(),
            SliceKind::ResolventShift(a) => vec![Complex::new(*a, 0.0)],
            SliceKind::IntrinsicRational { den, .. } => poly_roots(den),
            SliceKind::Transformed { inner, k } => {
                let mut v: Vec<Complex<f64>> = inner
                    .singularities()
                    .into_iter()
                    .filter_map(|z| {
                        let d = z - Complex::new(*k, 0.0);
                        (d.norm() > 0.0).then(|| d.inv())
                    })
                    .collect();
                if inner.value_at_infinity.is_none() {
                    v.push(Complex::new(0.0, 0.0));
                }
                v
            }
        };
        for z in &mut out {
            z.im = z.im.abs();
        }
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out.dedup_by(|a, b| (*a - *b).norm() <= 1e-12 * (1.0 + b.norm()));
        out
    }
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

fn horner(c: &[f64], z: Complex<f64>) -> Complex<f64> {
    c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, a| acc * z + *a)
}

/// Complex roots of a real polynomial (ascending coefficients) from the
/// eigenvalues of its companion matrix.
fn poly_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let m = c.len().saturating_sub(1);
    if m == 0 {
        return Vec::new();
    }
    let lead = c[m];
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        comp[(i, m - 1)] = -c[i] / lead;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

/// Adaptive sum of `sum d^n a_n`: stops once two consecutive terms fall
/// below `SERIES_RTOL` of the partial sum.
fn sum_series(coeffs: &[Quaternion], d: Quaternion) -> Result<Quaternion> {
    let mut acc = Quaternion::ZERO;
    let mut pow = Quaternion::ONE;
    let mut small = 0;
    let mut last = 0.0;
    for (n, a) in coeffs.iter().take(MAX_SERIES_TERMS).enumerate() {
        if n > 0 {
            pow = pow * d;
        }
        let term = pow * *a;
        acc += term;
        last = term.norm();
        if last <= SERIES_RTOL * acc.norm() {
            small += 1;
            if small >= 2 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
    }
    if coeffs.len() > MAX_SERIES_TERMS {
        return Err(Error::Truncation { terms: MAX_SERIES_TERMS, last_term: last });
    }
    Ok(acc)
}

/// A point of `H` or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(Quaternion),
    Infinity,
}

/// `Phi(s) = (s - k)^{-1}`, with `Phi(inf) = 0` and `Phi(k) = inf`.
pub fn phi_transform(s: Extended, k: f64) -> Extended {
    match s {
        Extended::Infinity => Extended::Finite(Quaternion::ZERO),
        Extended::Finite(s) => match (s - Quaternion::real(k)).inverse() {
            Ok(p) => Extended::Finite(p),
            Err(_) => Extended::Infinity,
        },
    }
}

/// `Phi^{-1}(p) = p^{-1} + k`.
pub fn phi_inverse(p: Extended, k: f64) -> Extended {
    match p {
        Extended::Infinity => Extended::Finite(Quaternion::real(k)),
        Extended::Finite(p) => match p.inverse() {
            Ok(inv) => Extended::Finite(inv + Quaternion::real(k)),
            Err(_) => Extended::Infinity,
        },
    }
}

/// `phi(p) = f(p^{-1} + k)` with `phi(0) = f(inf)`.
pub fn compose_with_inverse_transform(f: &SliceFunction, k: f64) -> Result<SliceFunction> {
    let Some(_) = f.value_at_infinity else {
        return Err(Error::Contract("composition with Phi^{-1} needs f regular at infinity".into()));
    };
    // phi(inf) = f(k), when f is defined there
    let value_at_infinity = f.eval(Quaternion::real(k)).ok();
    Ok(SliceFunction {
        kind: SliceKind::Transformed { inner: Box::new(f.clone()), k },
        value_at_infinity,
    })
}

/// Disk `|z - center| < radius` probed on several slices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRegion {
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// Largest `|1/2 (d/dx + I d/dy) f_I(x + I y)|` over the probes.
    pub max_residual: f64,
    pub units: Vec<ImaginaryUnit>,
    pub step: f64,
    pub probes: usize,
    /// Probes skipped because `f` could not be evaluated nearby.
    pub skipped: usize,
}

fn probe_units() -> [ImaginaryUnit; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        ImaginaryUnit::I,
        ImaginaryUnit::J,
        ImaginaryUnit::K,
        ImaginaryUnit::from_vector(s, s, s).expect("unit"),
    ]
}

pub fn check_regularity(f: &SliceFunction, region: ProbeRegion, step: f64) -> Result<RegularityReport> {
    check_regularity_with(|q| f.eval(q), region, step)
}

/// Central-difference Cauchy-Riemann residual of an arbitrary function on
/// a 9x9 grid over the region, on four slices.
pub fn check_regularity_with(
    f: impl Fn(Quaternion) -> Result<Quaternion>,
    region: ProbeRegion,
    step: f64,
) -> Result<RegularityReport> {
    if !(step > 0.0) || !(region.radius > step) {
        return Err(Error::Domain(format!("step {step} does not fit in radius {}", region.radius)));
    }
    let units = probe_units();
    let mut max_residual: f64 = 0.0;
    let (mut probes, mut skipped) = (0, 0);
    const G: usize = 9;
    for u in units {
        let uq = u.quaternion();
        for a in 0..G {
            for b in 0..G {
                let x = region.center + region.radius * (2.0 * a as f64 / (G - 1) as f64 - 1.0);
                let y = region.radius * (2.0 * b as f64 / (G - 1) as f64 - 1.0);
                if ((x - region.center).powi(2) + y * y).sqrt() + step >= region.radius {
                    continue;
                }
                let at = |dx: f64, dy: f64| f(Quaternion::real(x + dx) + uq.scale(y + dy));
                let vals = (at(step, 0.0), at(-step, 0.0), at(0.0, step), at(0.0, -step));
                let (Ok(xp), Ok(xm), Ok(yp), Ok(ym)) = vals else {
                    skipped += 1;
                    continue;
                };
                let dx = (xp - xm).scale(0.5 / step);
                let dy = (yp - ym).scale(0.5 / step);
                let r = (dx + uq * dy).scale(0.5).norm();
                max_residual = max_residual.max(r);
                probes += 1;
            }
        }
    }
    if probes == 0 {
        return Err(Error::Domain("no probe point could be evaluated".into()));
    }
    Ok(RegularityReport { max_residual, units: units.to_vec(), step, probes, skipped })
}

/// JSON form of a [`SliceFunction`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(flatten)]
    pub kind: KindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_at_infinity: Option<Quaternion>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KindSpec {
    Polynomial { coeffs: Vec<Quaternion> },
    PowerSeries { coeffs: Vec<Quaternion>, center: f64, radius: f64 },
    IntrinsicRational { num: Vec<f64>, den: Vec<f64> },
    Exp,
    ResolventShift { alpha: f64 },
    Transformed { inner: Box<SliceFunction>, k: f64 },
}

impl TryFrom<FunctionSpec> for SliceFunction {
    type Error = Error;

    fn try_from(spec: FunctionSpec) -> Result<Self> {
        let f = match spec.kind {
            KindSpec::Polynomial { coeffs } => Self::polynomial(coeffs),
            KindSpec::PowerSeries { coeffs, center, radius } => Self::power_series(coeffs, center, radius)?,
            KindSpec::IntrinsicRational { num, den } => Self::intrinsic_rational(num, den)?,
            KindSpec::Exp => Self::exp(),
            KindSpec::ResolventShift { alpha } => Self::resolvent_shift(alpha),
            KindSpec::Transformed { inner, k } => compose_with_inverse_transform(&inner, k)?,
        };
        match spec.value_at_infinity {
            Some(v) => f.with_value_at_infinity(v),
            None => Ok(f),
        }
    }
}

impl From<SliceFunction> for FunctionSpec {
    fn from(f: SliceFunction) -> Self {
        let kind = match f.kind {
            SliceKind::Polynomial(coeffs) => KindSpec::Polynomial { coeffs },
            SliceKind::PowerSeries { coeffs, center, radius } => KindSpec::PowerSeries { coeffs, center, radius },
            SliceKind::IntrinsicRational { num, den } => KindSpec::IntrinsicRational { num, den },
            SliceKind::Exp => KindSpec::Exp,
            SliceKind::ResolventShift(alpha) => KindSpec::ResolventShift { alpha },
            SliceKind::Transformed { inner, k } => KindSpec::Transformed { inner, k },
        };
        FunctionSpec { kind, value_at_infinity: f.value_at_infinity }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{random_quaternion, seeded_rng};
    use proptest::prelude::*;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    /// exp of a 2x2 complex matrix by scaling and squaring a Taylor series.
    fn expm2(m: [[Complex<f64>; 2]; 2]) -> [[Complex<f64>; 2]; 2] {
        let norm = m.iter().flatten().map(|z| z.norm()).sum::<f64>();
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scale = 0.5f64.powi(s);
        let a = m.map(|r| r.map(|z| z * scale));
        let mul = |x: [[Complex<f64>; 2]; 2], y: [[Complex<f64>; 2]; 2]| {
            let mut o = [[Complex::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    o[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            o
        };
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let mut sum = [[one, zero], [zero, one]];
        let mut term = sum;
        for k in 1..30 {
            term = mul(term, a).map(|r| r.map(|z| z / k as f64));
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..s {
            sum = mul(sum, sum);
        }
        sum
    }

    #[test]
    fn eval_examples() {
        let one = SliceFunction::constant(Quaternion::ONE);
        assert_eq!(one.eval(q(3.0, -1.0, 2.0, 0.5)).unwrap(), Quaternion::ONE);
        assert_eq!(SliceFunction::exp().eval(Quaternion::ZERO).unwrap(), Quaternion::ONE);
        assert_eq!(SliceFunction::monomial(2).eval(Quaternion::J).unwrap(), Quaternion::real(-1.0));
    }

    #[test]
    fn right_coefficients() {
        let a = q(0.0, 0.0, 1.0, 0.0);
        let f = SliceFunction::polynomial(vec![Quaternion::ZERO, a]);
        // i * j = k, j * i = -k
        assert_eq!(f.eval(Quaternion::I).unwrap(), Quaternion::K);
    }

    #[test]
    fn domain_errors() {
        let f = SliceFunction::power_series(vec![Quaternion::ONE; 3], 1.0, 0.5).unwrap();
        assert!(matches!(f.eval(Quaternion::real(2.0)), Err(Error::Domain(_))));
        assert!(f.eval(Quaternion::new(1.1, 0.2, 0.0, 0.0)).is_ok());
        assert!(matches!(SliceFunction::resolvent_shift(2.0).eval(Quaternion::real(2.0)), Err(Error::Domain(_))));
        let g = compose_with_inverse_transform(&SliceFunction::resolvent_shift(2.0), 1.0).unwrap();
        assert_eq!(g.eval(Quaternion::ZERO).unwrap(), Quaternion::ZERO);
        let r = SliceFunction::intrinsic_rational(vec![1.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(r.eval(Quaternion::K), Err(Error::Domain(_))));
    }

    #[test]
    fn geometric_series_converges() {
        let coeffs = vec![Quaternion::ONE; 2000];
        let f = SliceFunction::power_series(coeffs, 0.0, 1.0).unwrap();
        let x = q(0.1, 0.2, 0.0, -0.1);
        let expect = (Quaternion::ONE - x).inverse().unwrap();
        assert!(f.eval(x).unwrap().dist(expect) < 1e-14);
        // too slow to converge in 500 terms
        assert!(matches!(f.eval(Quaternion::real(0.99)), Err(Error::Truncation { .. })));
    }

    #[test]
    fn phi_special_values() {
        assert_eq!(phi_transform(Extended::Infinity, 3.0), Extended::Finite(Quaternion::ZERO));
        assert_eq!(phi_transform(Extended::Finite(Quaternion::real(3.0)), 3.0), Extended::Infinity);
        let Extended::Finite(p) = phi_transform(Extended::Finite(q(1.0, 1.0, 0.0, 0.0)), 0.0) else {
            panic!()
        };
        assert!(p.dist(q(0.5, -0.5, 0.0, 0.0)) < 1e-16);
        let s = Extended::Finite(q(0.3, 1.0, -2.0, 0.4));
        let Extended::Finite(back) = phi_inverse(phi_transform(s, 1.5), 1.5) else { panic!() };
        assert!(back.dist(q(0.3, 1.0, -2.0, 0.4)) < 1e-14);
        assert_eq!(phi_inverse(Extended::Finite(Quaternion::ZERO), 1.5), Extended::Infinity);
    }

    #[test]
    fn composition() {
        let c = q(1.0, 2.0, -1.0, 0.0);
        let phi = compose_with_inverse_transform(&SliceFunction::constant(c), 2.0).unwrap();
        assert_eq!(phi.eval(q(0.3, 0.1, 0.0, 0.0)).unwrap(), c);
        assert_eq!(phi.eval(Quaternion::ZERO).unwrap(), c);

        let (alpha, k) = (-1.0, 2.0);
        let f = SliceFunction::resolvent_shift(alpha);
        let phi = compose_with_inverse_transform(&f, k).unwrap();
        assert_eq!(phi.eval(Quaternion::ZERO).unwrap(), Quaternion::ZERO);
        let p = q(0.2, 0.1, 0.3, 0.0);
        let expect = (p.inverse().unwrap() + Quaternion::real(k - alpha)).inverse().unwrap();
        assert!(phi.eval(p).unwrap().dist(expect) < 1e-15);

        let mut rng = seeded_rng(17);
        for _ in 0..100 {
            let s = random_quaternion(&mut rng, 3.0);
            let Extended::Finite(p) = phi_transform(Extended::Finite(s), k) else { continue };
            let lhs = phi.eval(p).unwrap();
            let rhs = f.eval(s).unwrap();
            assert!(lhs.dist(rhs) <= 1e-12 * (1.0 + rhs.norm()));
        }

        assert!(matches!(compose_with_inverse_transform(&SliceFunction::exp(), 1.0), Err(Error::Contract(_))));
        assert!(matches!(
            SliceFunction::exp().with_value_at_infinity(Quaternion::ZERO),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn values_at_infinity() {
        let r = SliceFunction::intrinsic_rational(vec![1.0, 2.0], vec![3.0, 0.0, 4.0]).unwrap();
        assert_eq!(r.value_at_infinity(), Some(Quaternion::ZERO));
        let r = SliceFunction::intrinsic_rational(vec![1.0, 0.0, 3.0], vec![2.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.value_at_infinity(), Some(Quaternion::real(1.5)));
        assert!(r.estimate_value_at_infinity().unwrap().dist(Quaternion::real(1.5)) < 1e-5);
        assert_eq!(SliceFunction::intrinsic_rational(vec![0.0, 0.0, 1.0], vec![1.0]).unwrap().value_at_infinity(), None);
        assert_eq!(SliceFunction::monomial(1).value_at_infinity(), None);
    }

    #[test]
    fn singular_points() {
        let r = SliceFunction::intrinsic_rational(vec![1.0], vec![10.0, 2.0, 1.0]).unwrap();
        let s = r.singularities();
        assert_eq!(s.len(), 1);
        assert!((s[0] - Complex::new(-1.0, 3.0)).norm() < 1e-12);
        let t = compose_with_inverse_transform(&SliceFunction::resolvent_shift(3.0), 1.0).unwrap();
        assert_eq!(t.singularities(), vec![Complex::new(0.5, 0.0)]);
        assert!(SliceFunction::exp().singularities().is_empty());
    }

    #[test]
    fn regularity_checks() {
        let region = ProbeRegion { center: 0.0, radius: 1.0 };
        let step = 1e-3;
        let sq = check_regularity(&SliceFunction::monomial(2), region, step).unwrap();
        assert!(sq.max_residual <= 10.0 * step * step, "{}", sq.max_residual);
        assert!(sq.units.len() >= 3);

        let cube = SliceFunction::polynomial(vec![q(0.0, 1.0, 0.0, 0.0), Quaternion::ZERO, Quaternion::ZERO, q(1.0, 0.0, 2.0, 0.0)]);
        let c = check_regularity(&cube, region, 1e-2).unwrap();
        assert!(c.max_residual <= 10.0 * 1e-4, "{}", c.max_residual);

        let k = check_regularity(&SliceFunction::constant(q(1.0, 2.0, 3.0, 4.0)), region, step).unwrap();
        assert!(k.max_residual <= 1e-12);

        for h in [1e-2, 1e-3, 1e-4] {
            let bad = check_regularity_with(|q| Ok(q.conj()), region, h).unwrap();
            assert!((bad.max_residual - 1.0).abs() < 1e-6);
        }

        // right coefficients on the left would not be regular
        let a = q(0.0, 0.0, 1.0, 0.0);
        let left = check_regularity_with(|x| Ok(a * x), region, step).unwrap();
        assert!(left.max_residual > 0.5);
    }

    #[test]
    fn json_forms() {
        let f: SliceFunction = serde_json::from_str(r#"{"type":"polynomial","coeffs":[[1,0,0,0],[0,1,0,0]]}"#).unwrap();
        assert_eq!(f, SliceFunction::polynomial(vec![Quaternion::ONE, Quaternion::I]));
        let r: SliceFunction = serde_json::from_str(r#"{"type":"intrinsic_rational","num":[1],"den":[0,1]}"#).unwrap();
        assert_eq!(r.value_at_infinity(), Some(Quaternion::ZERO));
        let e: SliceFunction = serde_json::from_str(r#"{"type":"exp"}"#).unwrap();
        assert_eq!(e, SliceFunction::exp());
        let t: SliceFunction =
            serde_json::from_str(r#"{"type":"transformed","inner":{"type":"resolvent_shift","alpha":2},"k":0.5}"#).unwrap();
        assert!(matches!(t.kind(), SliceKind::Transformed { .. }));
        let back: SliceFunction = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<SliceFunction>(r#"{"type":"exp","value_at_infinity":[0,0,0,0]}"#).is_err());
        assert!(serde_json::from_str::<SliceFunction>(r#"{"type":"sin"}"#).is_err());
        let p: SliceFunction = serde_json::from_str(
            r#"{"type":"power_series","coeffs":[[1,0,0,0]],"center":0,"radius":1,"value_at_infinity":[2,0,0,0]}"#,
        )
        .unwrap();
        assert_eq!(p.value_at_infinity(), Some(Quaternion::real(2.0)));
    }

    fn slice_point() -> impl Strategy<Value = Quaternion> {
        (-3.0..3.0f64, 0.0..3.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_filter_map(
            "degenerate unit",
            |(a, b, x, y, z)| {
                let u = ImaginaryUnit::from_vector(x, y, z).ok()?;
                Some(Quaternion::real(a) + u.quaternion().scale(b))
            },
        )
    }

    proptest! {
        #[test]
        fn intrinsic_functions_preserve_slices(x in slice_point()) {
            let unit = x.decompose().unit.quaternion();
            let fs = [
                SliceFunction::exp(),
                SliceFunction::intrinsic_rational(vec![1.0, -2.0, 0.5], vec![7.0, 1.0, 1.0]).unwrap(),
                SliceFunction::resolvent_shift(5.0),
            ];
            for f in &fs {
                let v = f.eval(x).unwrap();
                if x.is_real() {
                    prop_assert!(v.is_real());
                    continue;
                }
                // component of v orthogonal to span{1, unit}
                let along = v.x * unit.x + v.y * unit.y + v.z * unit.z;
                let off = (v.im() - unit.scale(along)).norm();
                prop_assert!(off <= 1e-12 * v.norm());
            }
        }

        #[test]
        fn rational_matches_exact_polynomial_quotient(x in slice_point()) {
            // (q^2 + 3q + 2) / (q + 1) = q + 2
            let r = SliceFunction::intrinsic_rational(vec![2.0, 3.0, 1.0], vec![1.0, 1.0]).unwrap();
            prop_assume!(x.dist(Quaternion::real(-1.0)) > 1e-3);
            let lhs = r.eval(x).unwrap();
            let rhs = SliceFunction::real_polynomial(&[2.0, 1.0]).eval(x).unwrap();
            prop_assert!(lhs.dist(rhs) <= 1e-12 * rhs.norm().max(1.0));
        }

        #[test]
        fn exp_matches_two_by_two_adjoint(w in -5.0..5.0f64, x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) {
            let v = Quaternion::new(w, x, y, z);
            prop_assume!(v.norm() <= 10.0);
            let a = Complex::new(w, x);
            let b = Complex::new(y, z);
            let e = expm2([[a, b], [-b.conj(), a.conj()]]);
            let expect = Quaternion::new(e[0][0].re, e[0][0].im, e[0][1].re, e[0][1].im);
            let got = SliceFunction::exp().eval(v).unwrap();
            prop_assert!(got.dist(expect) <= 1e-12 * expect.norm(), "{} vs {}", got, expect);
        }
    }
}
