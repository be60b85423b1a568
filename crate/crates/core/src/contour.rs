//! Integration contours in a complex slice `L_I`.
//!
//! Points of a slice are stored as complex numbers `a + b i` standing for
//! `a + b I`. Each spectral sphere `(x, y)` meets the slice in `x + y I` and
//! `x - y I`; circles are built around clusters of those points so that no
//! excluded point (a singularity of the integrand's function) is enclosed.

use nalgebra::Complex;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quat::{ImaginaryUnit, Quaternion};
use crate::spectrum::SpectrumReport;

/// Node count of the first quadrature level.
pub const DEFAULT_NODES: usize = 64;
/// Cap on the margin between enclosed points and the circle, in units of
/// `1 + ||T||`.
pub const DEFAULT_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex<f64>,
    pub radius: f64,
    /// `+1` counterclockwise in the slice, `-1` clockwise.
    pub orientation: i8,
}

impl Circle {
    pub fn new(center: Complex<f64>, radius: f64) -> Self {
        Self { center, radius, orientation: 1 }
    }

    pub fn encloses(&self, z: Complex<f64>) -> bool {
        (z - self.center).norm() < self.radius
    }
}

impl Serialize for Circle {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            center: [f64; 2],
            radius: f64,
            #[serde(skip_serializing_if = "is_positive")]
            orientation: i8,
        }
        fn is_positive(o: &i8) -> bool {
            *o > 0
        }
        Repr { center: [self.center.re, self.center.im], radius: self.radius, orientation: self.orientation }
            .serialize(ser)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub slice_unit: ImaginaryUnit,
    pub circles: Vec<Circle>,
    pub nodes_per_circle: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    /// Smallest admissible margin around enclosed points.
    pub radius_min: f64,
    /// Largest margin used when nothing else constrains a circle.
    pub default_margin: f64,
    /// Fraction of the available room used for margins, in `(0, 1]`.
    pub margin_scale: f64,
}

impl ContourOptions {
    pub fn for_norm(norm: f64) -> Self {
        Self { radius_min: 1e-3 * (1.0 + norm), default_margin: DEFAULT_MARGIN * (1.0 + norm), margin_scale: 1.0 }
    }
}

/// The points where the spheres meet a slice, upper point first.
pub fn slice_points(spectrum: &SpectrumReport) -> Vec<Complex<f64>> {
    let mut out = Vec::new();
    for sp in &spectrum.spheres {
        if sp.is_real() {
            out.push(Complex::new(sp.x, 0.0));
        } else {
            out.push(Complex::new(sp.x, sp.y));
            out.push(Complex::new(sp.x, -sp.y));
        }
    }
    out
}

fn exclusion_points(exclusions: &[Quaternion]) -> Vec<Complex<f64>> {
    let mut out = Vec::new();
    for q in exclusions {
        let b = q.im_norm();
        out.push(Complex::new(q.re(), b));
        if b > 0.0 {
            out.push(Complex::new(q.re(), -b));
        }
    }
    out
}

pub fn build_contour(spectrum: &SpectrumReport, slice_unit: ImaginaryUnit, exclusions: &[Quaternion]) -> Result<Contour> {
    build_contour_with(spectrum, slice_unit, exclusions, &ContourOptions::for_norm(spectrum.norm_bound))
}

struct Cluster {
    members: Vec<Complex<f64>>,
    center: Complex<f64>,
    extent: f64,
}

impl Cluster {
    fn new(members: Vec<Complex<f64>>) -> Self {
        let center = members.iter().sum::<Complex<f64>>() / members.len() as f64;
        let extent = members.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        Self { members, center, extent }
    }
}

/// Each circle gets `radius = extent + margin` with the margin at most half
/// the gap to any other cluster and half the distance to any exclusion.
/// Clusters that cannot keep `radius_min` apart are merged.
pub fn build_contour_with(
    spectrum: &SpectrumReport,
    slice_unit: ImaginaryUnit,
    exclusions: &[Quaternion],
    opts: &ContourOptions,
) -> Result<Contour> {
    let points = slice_points(spectrum);
    let excl = exclusion_points(exclusions);
    for p in &points {
        for e in &excl {
            if (p - e).norm() < opts.radius_min {
                return Err(Error::ContourInfeasible(format!(
                    "excluded point {} + {}I lies on the spectrum",
                    e.re, e.im
                )));
            }
        }
    }
    let mut clusters: Vec<Cluster> = points.into_iter().map(|p| Cluster::new(vec![p])).collect();
    loop {
        let mut merge = None;
        let mut circles = Vec::with_capacity(clusters.len());
        for (i, c) in clusters.iter().enumerate() {
            let mut margin = opts.default_margin;
            let mut nearest = None;
            for (j, d) in clusters.iter().enumerate() {
                if i == j {
                    continue;
                }
                let half_gap = 0.5 * ((c.center - d.center).norm() - c.extent - d.extent);
                if half_gap < margin {
                    margin = half_gap;
                    nearest = Some(j);
                }
            }
            let excl_room = excl.iter().map(|e| 0.5 * ((e - c.center).norm() - c.extent)).fold(f64::INFINITY, f64::min);
            if excl_room < margin {
                if excl_room * opts.margin_scale < opts.radius_min {
                    return Err(Error::ContourInfeasible(format!(
                        "no room for a circle around {} + {}I without enclosing a singularity",
                        c.center.re, c.center.im
                    )));
                }
                margin = excl_room;
                nearest = None;
            }
            let margin = margin * opts.margin_scale;
            if margin < opts.radius_min {
                merge = Some((i, nearest.expect("gap-limited margin has a neighbour")));
                break;
            }
            circles.push(Circle::new(c.center, c.extent + margin));
        }
        match merge {
            None => {
                return Ok(Contour { slice_unit, circles, nodes_per_circle: DEFAULT_NODES });
            }
            Some((i, j)) => {
                let (lo, hi) = (i.min(j), i.max(j));
                let b = clusters.swap_remove(hi);
                let a = clusters.swap_remove(lo);
                clusters.push(Cluster::new([a.members, b.members].concat()));
            }
        }
    }
}

impl Contour {
    /// Quaternion on circle `c` at angle `theta`, plus the factor
    /// `r e^{I theta}`.
    pub fn node(&self, c: &Circle, theta: f64) -> (Quaternion, Quaternion) {
        let e = Complex::from_polar(c.radius, theta);
        let s = Quaternion::from_slice(c.center + e, self.slice_unit);
        (s, Quaternion::from_slice(e, self.slice_unit))
    }

    /// Same contour in another slice.
    pub fn with_slice(&self, unit: ImaginaryUnit) -> Self {
        Self { slice_unit: unit, ..self.clone() }
    }

    /// Scales every radius by `factor`, keeping the circles admissible:
    /// pairwise disjoint, each still enclosing the same spectral points and
    /// no excluded point.
    pub fn scaled(&self, factor: f64, spectrum: &SpectrumReport, exclusions: &[Quaternion]) -> Result<Self> {
        let mut out = self.clone();
        for c in &mut out.circles {
            c.radius *= factor;
        }
        out.check_admissible(spectrum, exclusions)?;
        Ok(out)
    }

    /// Verifies that positively oriented circles have disjoint interiors, enclose every
    /// spectral point exactly once with a clearance of `radius_min`, and
    /// enclose none of the exclusions.
    pub fn check_admissible(&self, spectrum: &SpectrumReport, exclusions: &[Quaternion]) -> Result<()> {
        let radius_min = 1e-3 * (1.0 + spectrum.norm_bound);
        let own: Vec<&Circle> = self.circles.iter().filter(|c| c.orientation > 0).collect();
        for (i, a) in own.iter().enumerate() {
            for b in &own[i + 1..] {
                // circles may touch, interiors must not meet
                if (a.center - b.center).norm() < (a.radius + b.radius) * (1.0 - 1e-12) {
                    return Err(Error::ContourInfeasible("contour circles overlap".into()));
                }
            }
        }
        for p in slice_points(spectrum) {
            let n = own.iter().filter(|c| c.encloses(p)).count();
            if n != 1 {
                return Err(Error::ContourInfeasible(format!("spectral point {} + {}I enclosed {n} times", p.re, p.im)));
            }
            if own.iter().any(|c| ((p - c.center).norm() - c.radius).abs() < radius_min) {
                return Err(Error::ContourInfeasible(format!("contour passes within {radius_min} of the spectrum")));
            }
        }
        for e in exclusion_points(exclusions) {
            if own.iter().any(|c| (e - c.center).norm() <= c.radius) {
                return Err(Error::ContourInfeasible(format!("singularity {} + {}I inside the contour", e.re, e.im)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{s_spectrum, SpectralSphere};
    use crate::linalg::QuatMatrix;
    use crate::quat::seeded_rng;

    fn report(spheres: &[(f64, f64)], norm: f64) -> SpectrumReport {
        SpectrumReport {
            spheres: spheres.iter().map(|&(x, y)| SpectralSphere { x, y, multiplicity: 1 }).collect(),
            norm_bound: norm,
            pencil_condition: Vec::new(),
        }
    }

    #[test]
    fn single_real_point() {
        let r = report(&[(2.0, 0.0)], 2.0);
        let c = build_contour(&r, ImaginaryUnit::I, &[]).unwrap();
        assert_eq!(c.circles.len(), 1);
        assert_eq!(c.circles[0].center, Complex::new(2.0, 0.0));
        assert_eq!(c.circles[0].radius, DEFAULT_MARGIN * 3.0);
    }

    #[test]
    fn sphere_gives_conjugate_circles() {
        let r = report(&[(0.0, 1.0)], 1.0);
        let c = build_contour(&r, ImaginaryUnit::J, &[]).unwrap();
        let mut centers: Vec<_> = c.circles.iter().map(|c| c.center).collect();
        centers.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert_eq!(centers, vec![Complex::new(0.0, -1.0), Complex::new(0.0, 1.0)]);
        assert!(c.circles.iter().all(|c| c.radius <= 1.0));
        c.check_admissible(&r, &[]).unwrap();

        let k = Quaternion::real(1.5);
        let c = build_contour(&r, ImaginaryUnit::I, &[k]).unwrap();
        let d = (Complex::new(1.5, 0.0) - Complex::new(0.0, 1.0)).norm();
        assert!(c.circles.iter().all(|c| c.radius < d && c.radius <= 0.5 * d));
        c.check_admissible(&r, &[k]).unwrap();
    }

    #[test]
    fn close_points_are_merged() {
        let r = report(&[(0.0, 0.0), (1e-4, 0.0), (3.0, 0.0)], 3.0);
        let c = build_contour(&r, ImaginaryUnit::I, &[]).unwrap();
        assert_eq!(c.circles.len(), 2);
        c.check_admissible(&r, &[]).unwrap();
    }

    #[test]
    fn enclosed_singularity_is_infeasible() {
        let r = report(&[(1.0, 0.0)], 1.0);
        let e = build_contour(&r, ImaginaryUnit::I, &[Quaternion::real(1.0)]);
        assert!(matches!(e, Err(Error::ContourInfeasible(_))));
        // two points straddling a pole, too close to separate
        let r = report(&[(0.0, 0.0), (1e-3, 0.0)], 1.0);
        let e = build_contour(&r, ImaginaryUnit::I, &[Quaternion::real(5e-4)]);
        assert!(matches!(e, Err(Error::ContourInfeasible(_))));
    }

    #[test]
    fn random_spectra_admissible() {
        let mut rng = seeded_rng(21);
        for _ in 0..20 {
            let t = QuatMatrix::random(5, 2.0, &mut rng);
            let r = s_spectrum(&t).unwrap();
            let excl = [Quaternion::new(3.0, 1.0, 0.0, 0.0)];
            let c = build_contour(&r, ImaginaryUnit::K, &excl).unwrap();
            c.check_admissible(&r, &excl).unwrap();
            let half = build_contour_with(&r, ImaginaryUnit::K, &excl, &ContourOptions { margin_scale: 0.5, ..ContourOptions::for_norm(r.norm_bound) }).unwrap();
            half.scaled(2.0, &r, &excl).unwrap();
        }
    }

    #[test]
    fn json_shape() {
        let c = Circle::new(Complex::new(1.0, -2.0), 0.5);
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"center":[1.0,-2.0],"radius":0.5}"#);
        let c = Circle { orientation: -1, ..c };
        assert!(serde_json::to_string(&c).unwrap().contains(r#""orientation":-1"#));
    }
}
