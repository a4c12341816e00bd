use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// `Invalid*` variants are contract violations on the inputs; the remaining
/// variants are numerical rejections (a computation ran but its result cannot
/// be trusted or does not exist).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("spectrum rejected: {0}")]
    Spectrum(String),

    #[error("parameter `{name}` out of domain: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("subspaces are not transverse (sin of minimal angle = {sin_angle:e})")]
    NotTransverse { sin_angle: f64 },

    #[error("cone invariance fails at {point:?}: ratio {ratio} exceeds {beta}")]
    ConeInvariance { point: Vec<f64>, ratio: f64, beta: f64 },

    #[error("expression error at byte {pos}: {msg}")]
    Expression { pos: usize, msg: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no sign change: {0}")]
    NoSignChange(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("operation not supported for this map: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain { name, reason: reason.into() }
}
