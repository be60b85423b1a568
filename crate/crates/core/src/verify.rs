//! Seeded property suites behind `squatcalc verify`.

use rand::Rng;
use serde::Serialize;

use crate::calculus::{lemma_identities_residual, transform_identity_residual};
use crate::error::Result;
use crate::linalg::QuatMatrix;
use crate::quat::{random_quaternion, seeded_rng, Quaternion};
use crate::resolvent::{s_left_inverse, s_resolvent};
use crate::spectrum::in_resolvent_set;

/// Pairs whose pencil has `sigma_min < PENCIL_RTOL sigma_max` are skipped.
pub const PENCIL_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Negative control: flips the sign of every computed S-resolvent.
    pub corrupt_resolvent_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Largest residual, already divided by the per-case scale.
    pub max_residual: f64,
    pub contract: f64,
    pub cases: usize,
    pub skipped: usize,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, contract: f64) -> Self {
        Self { name, max_residual: 0.0, contract, cases: 0, skipped: 0, pass: true }
    }

    fn record(&mut self, r: f64) {
        self.cases += 1;
        if !(r <= self.contract) {
            self.pass = false;
        }
        if r.is_nan() || r > self.max_residual {
            self.max_residual = r;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Seeded operator and quaternion, flagged `false` when the pencil is too
/// badly conditioned for the residual contracts to apply.
pub fn resolvent_pair(seed: u64, index: u64) -> (QuatMatrix, Quaternion, bool) {
    let mut rng = seeded_rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index));
    let norm = rng.random_range(0.5..3.0);
    let t = QuatMatrix::random(4, norm, &mut rng);
    let s = random_quaternion(&mut rng, 2.0 * norm);
    let cert = in_resolvent_set(&t, s);
    let ok = cert.sigma_min >= PENCIL_RTOL * cert.sigma_max;
    (t, s, ok)
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let sign = if opts.corrupt_resolvent_sign { -1.0 } else { 1.0 };
    let mut eq = Check::new("resolvent_equation", 1e-10);
    let mut inv = Check::new("left_right_inverse", 1e-10);
    for i in 0..100 {
        let (t, s, ok) = resolvent_pair(opts.seed, i);
        if !ok {
            eq.skipped += 1;
            inv.skipped += 1;
            continue;
        }
        let r = s_resolvent(&t, s)?.operator.scale_real(sign);
        let id = QuatMatrix::identity(t.n());
        let res = &(&r.scale_right(s) - &(&t * &r)) - &id;
        eq.record(res.op_norm() / (1.0 + t.op_norm()));
        let left = s_left_inverse(&t, s)?;
        let a = (&(&left * &r) - &id).op_norm();
        let b = (&(&r * &left) - &id).op_norm();
        inv.record(a.max(b));
    }

    let mut lemma = Check::new("lemma_identities", 1e-11);
    let mut rng = seeded_rng(opts.seed ^ 0x1e33a);
    while lemma.cases + lemma.skipped < 1000 {
        let s = random_quaternion(&mut rng, 5.0);
        let k = rng.random_range(-10.0..10.0);
        if (s - Quaternion::real(k)).norm() < 0.1 {
            continue;
        }
        let r = lemma_identities_residual(s, k)?;
        if r.all().iter().any(|id| id.residual.is_none()) {
            lemma.skipped += 1;
            continue;
        }
        let worst = r.all().iter().filter_map(|id| Some(id.residual? / id.scale)).fold(0.0, f64::max);
        lemma.record(worst);
    }

    let mut tr = Check::new("transform_relation", 1e-9);
    for i in 0..100 {
        let (t, s, ok) = resolvent_pair(opts.seed ^ 0x7a11, i);
        let k = t.op_norm().ceil() + 1.0 + (i % 3) as f64;
        if !ok || (s - Quaternion::real(k)).norm() < 0.1 {
            tr.skipped += 1;
            continue;
        }
        match transform_identity_residual(&t, s, k) {
            Ok(r) => tr.record(r.relation.max(r.companion)),
            Err(_) => tr.skipped += 1,
        }
    }

    let checks = vec![eq, inv, lemma, tr];
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { seed: opts.seed, checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_passes() {
        let r = run_verify(&VerifyOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.checks.iter().all(|c| c.cases > 0));
        let lemma = r.checks.iter().find(|c| c.name == "lemma_identities").unwrap();
        assert_eq!(lemma.cases + lemma.skipped, 1000);
        assert!(lemma.skipped < 10);
    }

    #[test]
    fn corrupted_sign_fails() {
        let r = run_verify(&VerifyOptions { seed: 3, corrupt_resolvent_sign: true }).unwrap();
        assert!(!r.pass);
        assert!(!r.checks[0].pass);
    }
}
