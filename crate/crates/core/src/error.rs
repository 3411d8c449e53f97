use thiserror::Error;

use crate::certificate::VerificationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid condition class: {0}")]
    InvalidCondition(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("rate polynomial has no root in (0, 1) for kappa = {kappa}, beta = {beta}")]
    NoRootInUnitInterval { kappa: f64, beta: f64 },

    #[error("certificate rejected by verification")]
    CertificateRejected(Box<VerificationReport>),

    #[error("no feasible rate below 1 for kappa = {kappa}, beta = {beta}")]
    NoRateFound { kappa: f64, beta: f64 },

    #[error("trajectory diverged at t = {t}: distance {distance:e} exceeds {limit:e}")]
    Divergence { t: usize, distance: f64, limit: f64 },

    #[error("empty grid")]
    EmptyGrid,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
