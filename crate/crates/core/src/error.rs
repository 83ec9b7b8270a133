use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {function}: {message}")]
    Domain { function: &'static str, message: String },

    #[error(
        "quadrature did not converge after {levels} levels: estimate {estimate:e}, error estimate {error_estimate:e}"
    )]
    Quadrature { estimate: f64, error_estimate: f64, levels: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The profiled criterion is -inf when the sample is identically zero.
    #[error("degenerate sample: quadratic form vanishes, profiled likelihood is unbounded")]
    DegenerateSample,

    #[error("grid evaluation is not real: imaginary residue {residue:e}")]
    NotReal { residue: f64 },

    #[error("invalid parameter box: {0}")]
    InvalidBox(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(function: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { function, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
