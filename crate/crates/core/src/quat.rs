//! Quaternion arithmetic and slice geometry.
//!
//! A quaternion is stored scalar-first as `w + x i + y j + z k`. Every
//! non-real quaternion lies on exactly one complex line `L_I = R + I R`,
//! where `I` is its normalized imaginary part; real quaternions lie on all
//! of them. [`Quaternion::decompose`] returns those slice coordinates.
//!
//! # Seeded sampling
//!
//! All randomness in the crate goes through [`seeded_rng`], a ChaCha8
//! stream cipher generator keyed from a `u64` seed (`SeedableRng::seed_from_u64`).
//! ChaCha is counter based and produces the same stream on every platform.
//! Unit imaginaries are drawn with Archimedes' construction: `z` uniform in
//! `[-1, 1]`, azimuth uniform in `[0, 2pi)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of the quaternion algebra `H`.
///
/// Serialized as a JSON array `[w, x, y, z]` of four finite numbers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(r: f64) -> Self {
        Self::new(r, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// `|q|^2 = q conj(q)`.
    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scalar part `Re[q]`.
    #[inline]
    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part `Im[q]`, as a quaternion with zero scalar part.
    #[inline]
    pub fn im(self) -> Self {
        Self::new(0.0, self.x, self.y, self.z)
    }

    #[inline]
    pub fn im_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn is_real(self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn scale(self, r: f64) -> Self {
        Self::new(self.w * r, self.x * r, self.y * r, self.z * r)
    }

    /// `q^{-1} = conj(q) / |q|^2`.
    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::Domain("inverse of zero quaternion".into()));
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// Integer power by repeated squaring. Negative exponents invert first.
    pub fn powi(self, n: i32) -> Result<Self> {
        let mut base = if n < 0 { self.inverse()? } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Slice coordinates `q = a + b I` with `b >= 0`.
    ///
    /// Real quaternions get the canonical unit `i`.
    pub fn decompose(self) -> SlicePoint {
        let b = self.im_norm();
        if b == 0.0 {
            return SlicePoint { a: self.w, b: 0.0, unit: ImaginaryUnit::I };
        }
        let unit = ImaginaryUnit(Self::new(0.0, self.x / b, self.y / b, self.z / b));
        SlicePoint { a: self.w, b, unit }
    }

    /// Embeds the complex number `re + im i` into the slice `L_unit`.
    #[inline]
    pub fn from_slice(z: Complex<f64>, unit: ImaginaryUnit) -> Self {
        Self::real(z.re) + unit.0.scale(z.im)
    }

    /// Coordinates of `self` in `L_unit`, assuming `self` lies there.
    /// The imaginary coordinate is the projection of `Im[q]` on `unit`.
    #[inline]
    pub fn slice_coords(self, unit: ImaginaryUnit) -> Complex<f64> {
        let u = unit.0;
        Complex::new(self.w, self.x * u.x + self.y * u.y + self.z * u.z)
    }

    /// Component-wise distance, `|p - q|`.
    #[inline]
    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.w, self.x, self.y, self.z)
    }
}

impl From<f64> for Quaternion {
    fn from(r: f64) -> Self {
        Self::real(r)
    }
}

impl TryFrom<[f64; 4]> for Quaternion {
    type Error = Error;

    fn try_from(a: [f64; 4]) -> Result<Self> {
        let q = Self::new(a[0], a[1], a[2], a[3]);
        if !q.is_finite() {
            return Err(Error::Input(format!("non-finite quaternion {a:?}")));
        }
        Ok(q)
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product: `i^2 = j^2 = k^2 = -1`, `ij = -ji = k`.
impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, r: f64) -> Self {
        self.scale(r)
    }
}

/// A purely imaginary unit quaternion, an element of the sphere `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 4]")]
pub struct ImaginaryUnit(Quaternion);

impl ImaginaryUnit {
    pub const I: Self = Self(Quaternion::I);
    pub const J: Self = Self(Quaternion::J);
    pub const K: Self = Self(Quaternion::K);

    /// Normalizes the imaginary part of `q`. Fails when it vanishes or when
    /// `q` carries a scalar part larger than rounding noise.
    pub fn new(q: Quaternion) -> Result<Self> {
        let b = q.im_norm();
        if !(b > 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("{q} has no imaginary direction")));
        }
        if q.w.abs() > 1e-12 * q.norm() {
            return Err(Error::Domain(format!("{q} is not purely imaginary")));
        }
        Ok(Self(q.im().scale(1.0 / b)))
    }

    pub fn from_vector(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Quaternion::new(0.0, x, y, z))
    }

    /// Uniformly distributed unit imaginary.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let rho = (1.0 - z * z).max(0.0).sqrt();
        Self(Quaternion::new(0.0, rho * phi.cos(), rho * phi.sin(), z))
    }

    #[inline]
    pub fn quaternion(self) -> Quaternion {
        self.0
    }
}

impl From<ImaginaryUnit> for Quaternion {
    fn from(u: ImaginaryUnit) -> Self {
        u.0
    }
}

impl From<ImaginaryUnit> for [f64; 4] {
    fn from(u: ImaginaryUnit) -> Self {
        u.0.into()
    }
}

/// Point `a + b I` of the complex line `L_I`, with `b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub a: f64,
    pub b: f64,
    pub unit: ImaginaryUnit,
}

impl SlicePoint {
    #[inline]
    pub fn embed(self) -> Quaternion {
        Quaternion::real(self.a) + self.unit.0.scale(self.b)
    }

    #[inline]
    pub fn to_complex(self) -> Complex<f64> {
        Complex::new(self.a, self.b)
    }
}

/// The crate-wide seeded generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Quaternion with independent components uniform in `[-scale, scale]`.
pub fn random_quaternion<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Quaternion {
    Quaternion::new(
        rng.random_range(-scale..=scale),
        rng.random_range(-scale..=scale),
        rng.random_range(-scale..=scale),
        rng.random_range(-scale..=scale),
    )
}

/// `count` seeded points `x + y u` of the sphere `x + y S`.
pub fn sample_sphere(x: f64, y: f64, count: usize, seed: u64) -> Result<Vec<Quaternion>> {
    if count == 0 {
        return Err(Error::Domain("sample_sphere needs count >= 1".into()));
    }
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("sphere radius {y} is negative")));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..count)
        .map(|_| Quaternion::real(x) + ImaginaryUnit::random(&mut rng).0.scale(y))
        .collect())
}
