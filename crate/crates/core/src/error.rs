use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate:.6e})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coincident elements: link distance is zero")]
    CoincidentElements,

    #[error("invalid Rician factor {0}: the scaled NLOS form needs K_Rice > 0")]
    InvalidRicianFactor(f64),

    #[error("operation requires the {expected} topology")]
    WrongTopology { expected: &'static str },

    #[error("descent violated at iteration {iteration}: f rose from {before:.12e} to {after:.12e}")]
    NonmonotoneDetected {
        iteration: usize,
        before: f64,
        after: f64,
    },

    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
