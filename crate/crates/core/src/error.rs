use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series is not invertible: leading coefficient is zero")]
    NotInvertible,

    #[error("{divisor} does not divide level {level}")]
    NotADivisor { divisor: u64, level: u64 },

    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("enumeration of level {level} weight {weight} exceeded the candidate cap of {cap}")]
    BudgetExceeded { level: u64, weight: u64, cap: u64 },

    #[error("order matrix for level {0} is singular")]
    SingularOrderMatrix(u64),

    #[error("{label}: {required} coefficients are needed, only {available} supplied")]
    InsufficientCoefficients {
        label: String,
        required: usize,
        available: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{label}: {message}")]
    InvalidRecord { label: String, message: String },

    #[error("newform {0} not found")]
    LabelNotFound(String),

    #[error("network error: {0}")]
    Network(String),

    #[error("numeric evaluation refused: truncation error {error:e} exceeds {limit:e}")]
    Precision { error: f64, limit: f64 },

    #[error("io error at {path}: {source}")]
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
