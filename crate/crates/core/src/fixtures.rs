//! Built-in test operators.
//!
//! Fixtures are named with an optional parameter list, e.g. `diag-i`,
//! `real-scalar:t=2,n=3`, `random:n=4,seed=7,norm=1` or
//! `derivative:n=8,h=0.1`.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::QuatMatrix;
use crate::quat::{seeded_rng, Quaternion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    /// The 1x1 operator `i`.
    DiagI,
    RealScalar { t: f64, n: usize },
    /// Random matrix scaled to operator norm `norm`.
    Random { n: usize, seed: u64, norm: f64 },
    /// Central first-difference operator with a quaternionic potential.
    Derivative { n: usize, h: f64 },
}

impl Fixture {
    pub fn build(&self) -> QuatMatrix {
        match *self {
            Fixture::DiagI => diag_i(),
            Fixture::RealScalar { t, n } => real_scalar(t, n),
            Fixture::Random { n, seed, norm } => random(n, seed, norm),
            Fixture::Derivative { n, h } => derivative(n, h),
        }
    }

    /// Parses `name[:key=value,...]`; `default_seed` fills a missing seed.
    pub fn parse(spec: &str, default_seed: u64) -> Result<Self> {
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = BTreeMap::new();
        for item in params.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("fixture parameter '{item}' is not key=value")))?;
            kv.insert(k.trim(), v.trim());
        }
        let mut take = |key: &str| kv.remove(key);
        let fixture = match name.trim() {
            "diag-i" => Fixture::DiagI,
            "real-scalar" => Fixture::RealScalar { t: num(take("t"), 2.0)?, n: num(take("n"), 3)? },
            "random" => Fixture::Random {
                n: num(take("n"), 4)?,
                seed: num(take("seed"), default_seed)?,
                norm: num(take("norm"), 1.0)?,
            },
            "derivative" => Fixture::Derivative { n: num(take("n"), 8)?, h: num(take("h"), 0.1)? },
            other => return Err(Error::Input(format!("unknown fixture '{other}'"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::Input(format!("unknown parameter '{k}' for fixture '{name}'")));
        }
        match fixture {
            Fixture::RealScalar { n: 0, .. } | Fixture::Random { n: 0, .. } | Fixture::Derivative { n: 0, .. } => {
                Err(Error::Input("fixture dimension must be positive".into()))
            }
            Fixture::Derivative { h, .. } if !(h > 0.0) => Err(Error::Input("derivative step must be positive".into())),
            Fixture::Random { norm, .. } if !(norm > 0.0) => Err(Error::Input("random norm must be positive".into())),
            f => Ok(f),
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 0)
    }
}

fn num<T: FromStr>(v: Option<&str>, default: T) -> Result<T> {
    match v {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| Error::Input(format!("cannot parse fixture parameter '{s}'"))),
    }
}

pub fn diag_i() -> QuatMatrix {
    QuatMatrix::from_diag(&[Quaternion::I])
}

pub fn real_scalar(t: f64, n: usize) -> QuatMatrix {
    QuatMatrix::scalar(n, Quaternion::real(t))
}

pub fn random(n: usize, seed: u64, norm: f64) -> QuatMatrix {
    QuatMatrix::random(n, norm, &mut seeded_rng(seed))
}

/// `(D u)_j = (u_{j+1} - u_{j-1}) / h` plus the potential
/// `V_j = 1/2 + (cos(j pi/n) i + sin(j pi/n) j) / 4`.
///
/// The difference part is skew-symmetric with norm
/// `(2/h) cos(pi/(n+1))`, so the operator norm grows like `1/h`.
pub fn derivative(n: usize, h: f64) -> QuatMatrix {
    let inv_h = 1.0 / h;
    QuatMatrix::from_fn(n, |i, j| {
        if i == j {
            let a = std::f64::consts::PI * i as f64 / n as f64;
            Quaternion::new(0.5, 0.25 * a.cos(), 0.25 * a.sin(), 0.0)
        } else if j == i + 1 {
            Quaternion::real(inv_h)
        } else if i == j + 1 {
            Quaternion::real(-inv_h)
        } else {
            Quaternion::ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_fixtures() {
        assert_eq!(Fixture::parse("diag-i", 0).unwrap().build(), diag_i());
        let r = "real-scalar:t=2,n=3".parse::<Fixture>().unwrap().build();
        assert_eq!(r, QuatMatrix::from_diag(&[Quaternion::real(2.0); 3]));
        let a = Fixture::parse("random:n=4,norm=1", 9).unwrap().build();
        assert_eq!(a, random(4, 9, 1.0));
        assert!((a.op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_specs() {
        for s in ["nope", "random:n", "random:n=x", "random:q=1", "derivative:h=0", "real-scalar:n=0"] {
            assert!(matches!(Fixture::parse(s, 0), Err(Error::Input(_))), "{s}");
        }
    }

    #[test]
    fn derivative_norm_grows_like_inverse_step() {
        let d = derivative(8, 0.1);
        assert!(d.op_norm() >= 10.0);
        // Gershgorin: every row sum is at most 2/h + |V|
        assert!(d.op_norm() <= 2.0 / 0.1 + 0.6);
        let coarse = derivative(16, 0.1).op_norm();
        let fine = derivative(16, 0.05).op_norm();
        assert!(fine > 1.9 * coarse - 1.0);
        // skew part: (2/h) cos(pi/(n+1)) within the potential size
        let skew = 2.0 / 0.1 * (std::f64::consts::PI / 9.0).cos();
        assert!((d.op_norm() - skew).abs() <= 0.6);
    }
}
