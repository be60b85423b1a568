//! Quaternionic S-functional calculus for bounded and unbounded-type
//! right-linear operators on `H^n`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod contour;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod quat;
pub mod resolvent;
pub mod slice_fn;
pub mod spectrum;
pub mod verify;

pub use calculus::{
    f_of_t, f_of_t_auto, f_of_t_inverse_series, f_of_t_unbounded, lemma_identities_residual,
    transform_identity_residual, CalcOptions, CalculusResult, UnboundedResult,
};
pub use contour::{build_contour, Contour};
pub use error::{Error, Result};
pub use linalg::QuatMatrix;
pub use quat::{ImaginaryUnit, Quaternion};
pub use resolvent::{resolvent_equation_residual, s_left_inverse, s_resolvent, s_resolvent_laurent, s_resolvent_series};
pub use slice_fn::SliceFunction;
pub use spectrum::{in_resolvent_set, s_spectrum, SpectralSphere, SpectrumReport};
