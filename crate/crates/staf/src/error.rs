//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by solvers, generators and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("bad data: {0}")]
    Data(String),

    #[error("signal has zero norm; relative error is undefined")]
    ZeroNormSignal,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("iteration diverged at pass {pass}: relative error {rel_err:.3e}")]
    Divergence { pass: usize, rel_err: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("malformed fixture: {0}")]
    Fixture(String),

    #[error("image error: {0}")]
    Image(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
