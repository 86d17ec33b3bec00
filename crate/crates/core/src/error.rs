use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A statistic is undefined for the input, e.g. correlation of a constant signal.
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("conditioning level {level} leaves no usable transition window")]
    EmptyConditioning { level: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("labels contain a single class: {0}")]
    SingleClass(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
