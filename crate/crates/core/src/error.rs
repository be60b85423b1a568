use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix not invertible (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    NotInvertible { sigma_min: f64, sigma_max: f64 },

    #[error("point is in the S-spectrum (pencil sigma_min = {sigma_min:e})")]
    NotInResolventSet { sigma_min: f64 },

    #[error("series diverges: ratio {ratio} >= 1")]
    Divergent { ratio: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("contour infeasible: {0}")]
    ContourInfeasible(String),

    #[error("quadrature did not converge after {nodes} nodes per circle (last difference {difference:e})")]
    QuadratureFailure { nodes: usize, difference: f64 },

    #[error("series truncated after {terms} terms with last term {last_term:e}")]
    Truncation { terms: usize, last_term: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenFailure,

    #[error("no real point of the S-resolvent set found within {steps} unit steps of {start}")]
    NoRealResolventPoint { start: f64, steps: usize },

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
