//! S-spectrum of a quaternionic matrix.
//!
//! `s` belongs to the S-spectrum of `T` when the pencil
//! `Q_s(T) = T^2 - 2 Re[s] T + |s|^2 I` is singular. The pencil depends on
//! `s` only through `Re[s]` and `|s|`, so the S-spectrum is a union of real
//! points and spheres `x + y S`. For matrices these spheres are read off
//! the eigenvalues of the complex adjoint: `chi(T)` has its eigenvalues in
//! conjugate pairs `x +- y i`, and each pair is one sphere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{QuatMatrix, SINGULAR_RTOL};
use crate::quat::Quaternion;

/// Relative tolerance for merging eigenvalue pairs into one sphere.
pub const SPHERE_MERGE_RTOL: f64 = 1e-9;
/// Spheres with `y <= TOL_REAL (1 + |x|)` are reported as real points.
pub const TOL_REAL: f64 = 1e-10;

/// The sphere `x + y S` (a real point when `y = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSphere {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "mult")]
    pub multiplicity: usize,
}

impl SpectralSphere {
    pub fn is_real(&self) -> bool {
        self.y == 0.0
    }

    /// The representative `x + y I`.
    pub fn point(&self, unit: crate::quat::ImaginaryUnit) -> Quaternion {
        Quaternion::real(self.x) + unit.quaternion().scale(self.y)
    }
}

/// Pencil singular values probed at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilProbe {
    pub s: Quaternion,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub spheres: Vec<SpectralSphere>,
    /// `||T||`; every sphere lies in the closed ball of this radius.
    pub norm_bound: f64,
    /// Pencil conditioning at `x + y i` for each sphere.
    #[serde(skip)]
    pub pencil_condition: Vec<PencilProbe>,
}

impl SpectrumReport {
    /// Sum of multiplicities; equals the matrix dimension.
    pub fn total_multiplicity(&self) -> usize {
        self.spheres.iter().map(|s| s.multiplicity).sum()
    }
}

/// `Q_s(T) = T^2 - 2 Re[s] T + |s|^2 I`.
pub fn pencil(t: &QuatMatrix, s: Quaternion) -> QuatMatrix {
    pencil_with_square(t, &(t * t), s.re(), s.norm_sqr())
}

/// Pencil from a precomputed `T^2`, `Re[s]` and `|s|^2`.
pub(crate) fn pencil_with_square(t: &QuatMatrix, t2: &QuatMatrix, re: f64, abs2: f64) -> QuatMatrix {
    (t2 - &t.scale_real(2.0 * re)).add_scalar(Quaternion::real(abs2))
}

pub fn s_spectrum(t: &QuatMatrix) -> Result<SpectrumReport> {
    let n = t.n();
    let chi = t.chi();
    let schur = nalgebra::linalg::Schur::try_new(chi, f64::EPSILON, 10_000 * (2 * n).max(1))
        .ok_or(Error::EigenFailure)?;
    let eig: Vec<_> = schur.eigenvalues().ok_or(Error::EigenFailure)?.iter().copied().collect();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let scale = 1.0 + eig.iter().map(|z| z.norm()).fold(0.0, f64::max);

    // Pair every eigenvalue with its conjugate partner, upper half plane first.
    let mut pending = eig;
    pending.sort_by(|a, b| b.im.total_cmp(&a.im).then(a.re.total_cmp(&b.re)));
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    while !pending.is_empty() {
        let lam = pending.remove(0);
        let Some((idx, _)) = pending
            .iter()
            .enumerate()
            .map(|(i, mu)| (i, (mu - lam.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return Err(Error::EigenFailure);
        };
        let mu = pending.remove(idx);
        let x = 0.5 * (lam.re + mu.re);
        let y = 0.5 * (lam.im - mu.im).abs();
        pairs.push((x, y));
    }

    // Merge numerically coincident pairs.
    let tol = SPHERE_MERGE_RTOL * scale;
    let mut parent: Vec<usize> = (0..pairs.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            if (pairs[a].0 - pairs[b].0).abs() <= tol && (pairs[a].1 - pairs[b].1).abs() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: Vec<(usize, f64, f64, usize)> = Vec::new();
    for (i, &(x, y)) in pairs.iter().enumerate() {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += x;
                g.2 += y;
                g.3 += 1;
            }
            None => groups.push((r, x, y, 1)),
        }
    }
    let mut spheres: Vec<SpectralSphere> = groups
        .into_iter()
        .map(|(_, sx, sy, m)| {
            let x = sx / m as f64;
            let mut y = sy / m as f64;
            if y <= TOL_REAL * (1.0 + x.abs()) {
                y = 0.0;
            }
            SpectralSphere { x, y, multiplicity: m }
        })
        .collect();
    spheres.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

    let t2 = t * t;
    let pencil_condition = spheres
        .iter()
        .map(|sp| {
            let s = Quaternion::new(sp.x, sp.y, 0.0, 0.0);
            let (sigma_min, sigma_max) = pencil_with_square(t, &t2, sp.x, s.norm_sqr()).sigma_extremes();
            PencilProbe { s, sigma_min, sigma_max }
        })
        .collect();

    Ok(SpectrumReport { spheres, norm_bound: t.op_norm(), pencil_condition })
}

/// Outcome of a resolvent-set membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventCertificate {
    pub in_resolvent_set: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// `s` is in the S-resolvent set iff the pencil is invertible to the
/// relative threshold [`SINGULAR_RTOL`], measured against `(||T|| + |s|)^2`.
pub fn in_resolvent_set(t: &QuatMatrix, s: Quaternion) -> ResolventCertificate {
    let (sigma_min, sigma_max) = pencil(t, s).sigma_extremes();
    // compare against the size of the terms of the pencil, not its own
    // sigma_max: a 1x1 pencil has sigma_min == sigma_max even on the spectrum
    let scale = sigma_max.max((t.op_norm() + s.norm()).powi(2));
    ResolventCertificate {
        in_resolvent_set: sigma_min > SINGULAR_RTOL * scale,
        sigma_min,
        sigma_max,
    }
}
