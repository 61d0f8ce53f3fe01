use std::fmt;

use thiserror::Error;

/// Why a (σ², ρ, r) triple is outside the model's domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvalidModelReason {
    /// σ² ≤ 0.
    NonPositiveVariance,
    /// A parameter is NaN or infinite.
    NonFinite,
    /// r ≤ ρ²: the covariance matrix is not positive definite.
    RNotAboveRhoSquared,
    /// 1 + 4(r + ρ) ≤ 0: the equilibrium constant A is not real.
    ADomain,
}

impl fmt::Display for InvalidModelReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Self::NonPositiveVariance => "sigma2 must be positive",
            Self::NonFinite => "parameters must be finite",
            Self::RNotAboveRhoSquared => "r must exceed rho^2 (r > rho^2)",
            Self::ADomain => "1 + 4(r + rho) must be positive",
        };
        f.write_str(msg)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model (sigma2={sigma2}, rho={rho}, r={r}): {reason}")]
    InvalidModel {
        sigma2: f64,
        rho: f64,
        r: f64,
        reason: InvalidModelReason,
    },

    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A cell of the partition carries (numerically) no probability mass.
    #[error("degenerate cell ({lower}, {upper}): probability mass {mass:e} underflows")]
    DegenerateCell { lower: f64, upper: f64, mass: f64 },

    /// Lloyd-Max stopped at `max_iter` without meeting the tolerance.
    #[error(
        "lloyd-max did not converge after {iterations} iterations (relative change {rel_change:e})"
    )]
    NoConvergence {
        iterations: usize,
        rel_change: f64,
        last_boundaries: Vec<f64>,
        last_levels: Vec<f64>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
