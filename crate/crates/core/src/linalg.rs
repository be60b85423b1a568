//! Quaternionic matrices acting as right-linear operators on `H^n`.
//!
//! Vectors are columns and the matrix acts by left multiplication, so
//! `M (v s) = (M v) s` for every quaternion `s`. A quaternion scalar `s`
//! used as an operator is the diagonal matrix `s I`; multiplying an
//! operator by `s` "on the right" is therefore `M (s I)`, which scales every
//! entry from the right (see [`QuatMatrix::scale_right`]).
//!
//! Inversion, singular values and eigenvalues all go through the complex
//! adjoint `chi(M)`. Writing every entry as `q = (w + x i) + (y + z i) j`
//! splits `M = A + B j` with complex `A`, `B`, and
//!
//! ```text
//! chi(M) = [[ A,        B       ],
//!           [ -conj(B), conj(A) ]]
//! ```
//!
//! which is an injective ring homomorphism into `2n x 2n` complex matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{random_quaternion, Quaternion};

/// Relative singularity threshold: `M` is treated as singular when
/// `sigma_min(chi(M)) <= SINGULAR_RTOL * sigma_max(chi(M))`.
pub const SINGULAR_RTOL: f64 = 1e-12;

pub type ComplexMatrix = DMatrix<Complex<f64>>;

/// Square quaternionic matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct QuatMatrix {
    n: usize,
    data: Vec<Quaternion>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<Vec<Quaternion>>,
}

impl TryFrom<MatrixRepr> for QuatMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let m = Self::from_rows(r.entries)?;
        if m.n != r.n {
            return Err(Error::Input(format!("declared n = {} but got {} rows", r.n, m.n)));
        }
        Ok(m)
    }
}

impl From<QuatMatrix> for MatrixRepr {
    fn from(m: QuatMatrix) -> Self {
        MatrixRepr { n: m.n, entries: m.rows() }
    }
}

impl QuatMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Quaternion::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Quaternion::ONE)
    }

    /// `q I`.
    pub fn scalar(n: usize, q: Quaternion) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = q;
        }
        m
    }

    pub fn from_diag(d: &[Quaternion]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, q) in d.iter().enumerate() {
            m[(i, i)] = *q;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Input("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Input(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    /// Entries uniform in `[-1, 1]^4`, rescaled so that `op_norm = norm`.
    pub fn random<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> Self {
        let m = Self::from_fn(n, |_, _| random_quaternion(rng, 1.0));
        let s = m.op_norm();
        m.scale_real(norm / s)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Quaternion>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn diag(&self) -> Vec<Quaternion> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Operator composition `(M N)(v) = M(N(v))`; entries of `self` multiply
    /// on the left.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Quaternion::ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> Self {
        Self { n: self.n, data: self.data.iter().map(|a| f(*a)).collect() }
    }

    /// `M (s I)`: every entry multiplied by `s` on the right.
    pub fn scale_right(&self, s: Quaternion) -> Self {
        self.map(|a| a * s)
    }

    /// `(s I) M`: every entry multiplied by `s` on the left.
    pub fn scale_left(&self, s: Quaternion) -> Self {
        self.map(|a| s * a)
    }

    pub fn scale_real(&self, r: f64) -> Self {
        self.map(|a| a.scale(r))
    }

    /// `M + s I`.
    pub fn add_scalar(&self, s: Quaternion) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += s;
        }
        m
    }

    /// `M - s I`.
    pub fn sub_scalar(&self, s: Quaternion) -> Self {
        self.add_scalar(-s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    /// Complex adjoint `chi(M)`.
    pub fn chi(&self) -> ComplexMatrix {
        let n = self.n;
        let mut c = ComplexMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let q = self.data[i * n + j];
                let a = Complex::new(q.w, q.x);
                let b = Complex::new(q.y, q.z);
                c[(i, j)] = a;
                c[(i, j + n)] = b;
                c[(i + n, j)] = -b.conj();
                c[(i + n, j + n)] = a.conj();
            }
        }
        c
    }

    /// Reads `M` back from the top block row of a matrix in the image of
    /// `chi`.
    pub fn from_chi(c: &ComplexMatrix) -> Result<Self> {
        if c.nrows() != c.ncols() || !c.nrows().is_multiple_of(2) {
            return Err(Error::Input(format!("{}x{} is not a complex adjoint", c.nrows(), c.ncols())));
        }
        let n = c.nrows() / 2;
        Ok(Self::from_fn(n, |i, j| {
            let a = c[(i, j)];
            let b = c[(i, j + n)];
            Quaternion::new(a.re, a.im, b.re, b.im)
        }))
    }

    /// Singular values of `chi(M)`, descending. Each singular value of `M`
    /// appears twice.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.chi().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Operator norm on `H^n`: the largest singular value of `chi(M)`.
    pub fn op_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// `(sigma_min, sigma_max)` of `chi(M)`.
    pub fn sigma_extremes(&self) -> (f64, f64) {
        let sv = self.singular_values();
        (sv[sv.len() - 1], sv[0])
    }

    /// Inverse through LU on `chi(M)`, after an SVD singularity check.
    pub fn invert(&self) -> Result<Self> {
        let (sigma_min, sigma_max) = self.sigma_extremes();
        if !(sigma_min > SINGULAR_RTOL * sigma_max) {
            return Err(Error::NotInvertible { sigma_min, sigma_max });
        }
        self.lu_inverse().ok_or(Error::NotInvertible { sigma_min, sigma_max })?
    }

    /// LU inverse without the singularity check; for callers that already
    /// certified the matrix.
    pub(crate) fn lu_inverse(&self) -> Option<Result<Self>> {
        self.chi().lu().try_inverse().map(|inv| Self::from_chi(&inv))
    }

    /// Powers `I, M, M^2, ..., M^max` by iterated multiplication.
    pub fn powers(&self, max: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(max + 1);
        out.push(Self::identity(self.n));
        for k in 1..=max {
            let next = &out[k - 1] * self;
            out.push(next);
        }
        out
    }

    /// `sum_n M^n a_n` with each coefficient on the right of its power.
    pub fn poly_eval(&self, coeffs: &[Quaternion]) -> Self {
        let mut acc = Self::zeros(self.n);
        if coeffs.is_empty() {
            return acc;
        }
        for (p, a) in self.powers(coeffs.len() - 1).iter().zip(coeffs) {
            acc = &acc + &p.scale_right(*a);
        }
        acc
    }

    /// `||self - other||_F / max(||other||_F, tiny)`.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        (self - other).frobenius_norm() / other.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

impl Index<(usize, usize)> for QuatMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for QuatMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.data[i * self.n + j]
    }
}

// Operator sugar for internal use; mismatched dimensions are a bug here, so
// these panic. The checked variants are `matmul`, `try_add`, `try_sub`.

impl Mul for &QuatMatrix {
    type Output = QuatMatrix;
    fn mul(self, o: &QuatMatrix) -> QuatMatrix {
        self.matmul(o).expect("dimension mismatch")
    }
}

impl Add for &QuatMatrix {
    type Output = QuatMatrix;
    fn add(self, o: &QuatMatrix) -> QuatMatrix {
        self.try_add(o).expect("dimension mismatch")
    }
}

impl Sub for &QuatMatrix {
    type Output = QuatMatrix;
    fn sub(self, o: &QuatMatrix) -> QuatMatrix {
        self.try_sub(o).expect("dimension mismatch")
    }
}

impl Neg for &QuatMatrix {
    type Output = QuatMatrix;
    fn neg(self) -> QuatMatrix {
        self.map(|a| -a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::seeded_rng;
    use proptest::prelude::*;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    fn cmax(a: &ComplexMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_and_basis() {
        let mut rng = seeded_rng(1);
        let m = QuatMatrix::random(3, 1.0, &mut rng);
        assert_eq!(m.matmul(&QuatMatrix::identity(3)).unwrap(), m);
        let di = QuatMatrix::from_diag(&[Quaternion::I]);
        let dj = QuatMatrix::from_diag(&[Quaternion::J]);
        assert_eq!(&di * &dj, QuatMatrix::from_diag(&[Quaternion::K]));
        assert!(matches!(
            m.matmul(&QuatMatrix::identity(2)),
            Err(Error::DimensionMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(QuatMatrix::identity(3).invert().unwrap(), QuatMatrix::identity(3));
        let inv = QuatMatrix::from_diag(&[q(1.0, 1.0, 0.0, 0.0)]).invert().unwrap();
        assert!(inv.rel_diff(&QuatMatrix::from_diag(&[q(0.5, -0.5, 0.0, 0.0)])) < 1e-15);

        // rank one: second row is a left multiple of the first
        let r = vec![q(1.0, 2.0, 0.0, 1.0), q(0.0, 1.0, -1.0, 0.5)];
        let c = q(0.3, 0.0, 2.0, -1.0);
        let m = QuatMatrix::from_rows(vec![r.clone(), r.iter().map(|x| c * *x).collect()]).unwrap();
        match m.invert() {
            Err(Error::NotInvertible { sigma_min, sigma_max }) => {
                assert!(sigma_min <= SINGULAR_RTOL * sigma_max)
            }
            other => panic!("expected NotInvertible, got {other:?}"),
        }
    }

    #[test]
    fn norms() {
        assert!((QuatMatrix::identity(4).op_norm() - 1.0).abs() < 1e-15);
        assert!((QuatMatrix::scalar(4, Quaternion::real(2.0)).op_norm() - 2.0).abs() < 1e-15);
        let a = q(1.0, -2.0, 2.0, 4.0);
        assert!((QuatMatrix::from_diag(&[a]).op_norm() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn polynomials() {
        let mut rng = seeded_rng(5);
        let m = QuatMatrix::random(3, 2.0, &mut rng);
        assert_eq!(m.poly_eval(&[Quaternion::ONE]), QuatMatrix::identity(3));
        assert_eq!(m.poly_eval(&[Quaternion::ZERO, Quaternion::ONE]), m);
        let di = QuatMatrix::from_diag(&[Quaternion::I]);
        let sq = di.poly_eval(&[Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE]);
        assert_eq!(sq, QuatMatrix::from_diag(&[Quaternion::real(-1.0)]));
    }

    #[test]
    fn right_coefficient_discipline() {
        let mut rng = seeded_rng(8);
        let m = QuatMatrix::random(3, 1.0, &mut rng);
        let a = q(0.2, 1.0, -0.5, 0.7);
        let p = m.poly_eval(&[Quaternion::ZERO, a]);
        assert_eq!(p, m.scale_right(a));
        assert!(p.rel_diff(&m.scale_left(a)) > 1e-3);
    }

    #[test]
    fn real_scalar_matrix_polynomial() {
        let t: f64 = 0.7;
        let coeffs = [q(1.0, 0.0, 2.0, 0.0), q(-0.5, 1.0, 0.0, 0.0), q(0.0, 0.0, 0.0, 3.0)];
        let expect: Quaternion = coeffs
            .iter()
            .enumerate()
            .fold(Quaternion::ZERO, |acc, (n, a)| acc + a.scale(t.powi(n as i32)));
        let p = QuatMatrix::scalar(2, Quaternion::real(t)).poly_eval(&coeffs);
        assert!(p.rel_diff(&QuatMatrix::scalar(2, expect)) < 1e-15);
    }

    #[test]
    fn json_shape() {
        let m = QuatMatrix::from_diag(&[Quaternion::I, Quaternion::ONE]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"n":2,"entries":[[[0.0,1.0,0.0,0.0],[0.0,0.0,0.0,0.0]],[[0.0,0.0,0.0,0.0],[1.0,0.0,0.0,0.0]]]}"#
        );
        assert_eq!(serde_json::from_str::<QuatMatrix>(&s).unwrap(), m);
        assert!(serde_json::from_str::<QuatMatrix>(r#"{"n":3,"entries":[[[1,0,0,0]]]}"#).is_err());
        assert!(serde_json::from_str::<QuatMatrix>(r#"{"n":2,"entries":[[[1,0,0,0]],[[1,0,0,0]]]}"#).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = QuatMatrix::random(5, 1.7, &mut seeded_rng(21));
        let back: QuatMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chi_is_a_ring_homomorphism(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = seeded_rng(seed);
            let m = QuatMatrix::random(n, 1.5, &mut rng);
            let k = QuatMatrix::random(n, 0.7, &mut rng);
            let prod = (m.chi() * k.chi()) - (&m * &k).chi();
            prop_assert!(cmax(&prod) <= 1e-12 * (1.0 + cmax(&(&m * &k).chi())));
            let sum = (m.chi() + k.chi()) - (&m + &k).chi();
            prop_assert!(cmax(&sum) <= 1e-15);
            prop_assert_eq!(QuatMatrix::from_chi(&m.chi()).unwrap(), m);
            prop_assert_eq!(QuatMatrix::identity(n).chi(), ComplexMatrix::identity(2 * n, 2 * n));
        }

        #[test]
        fn inverse_residual_scales_with_condition(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = seeded_rng(seed);
            let m = QuatMatrix::random(n, 1.0, &mut rng);
            let (smin, smax) = m.sigma_extremes();
            prop_assume!(smin > 1e-8 * smax);
            let cond = smax / smin;
            let inv = m.invert().unwrap();
            let id = QuatMatrix::identity(n);
            prop_assert!((&(&m * &inv) - &id).op_norm() <= 1e-10 * cond);
            prop_assert!((&(&inv * &m) - &id).op_norm() <= 1e-10 * cond);
        }
    }
}
