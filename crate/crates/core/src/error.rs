use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("curvature must be positive, got {0}")]
    NonPositiveCurvature(f64),

    #[error("curvature mismatch: {0} vs {1}")]
    CurvatureMismatch(f64, f64),

    #[error("averaging weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),

    #[error("invalid simplex weights: {0}")]
    InvalidWeights(String),

    #[error("level {level} is below the quadratic minimum {min_value}: certificate violated")]
    NegativeRadius { level: f64, min_value: f64 },

    #[error("ball intersection is empty (squared radius {0})")]
    EmptyIntersection(f64),

    #[error("quadratic program did not converge after {iterations} active-set changes")]
    QpNotConverged { iterations: usize, best: Vec<f64> },

    #[error("brute-force search supports at most 4 quadratics, got {0}")]
    BundleTooLarge(usize),

    #[error("bundle is empty")]
    EmptyBundle,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("solver diverged at iteration {0}")]
    Diverged(usize),

    #[error("certificate violated at iteration {iteration}: {message}")]
    CertificateViolation { iteration: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
