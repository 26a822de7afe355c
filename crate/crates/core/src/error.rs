use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A row or line of an input file could not be parsed.
    #[error("line {line}: field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    /// A value was parsed but violates a domain invariant.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("value {value} at position {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("scorer failed on item {index}: {message}")]
    Scorer { index: usize, message: String },

    #[error("sequence of length {len} is shorter than required length {required}")]
    SequenceTooShort { len: usize, required: usize },

    #[error("both count vectors have zero total")]
    EmptyCounts,

    #[error("{0}")]
    Reconstruction(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("design matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("measures and features do not join; unmatched keys: {}", .keys.join(", "))]
    JoinMismatch { keys: Vec<String> },

    #[error("incomplete bundle; missing: {}", .missing.join(", "))]
    IncompleteBundle { missing: Vec<String> },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True when the failure is attributable to user input rather than a
    /// defect in this crate. The CLI maps this onto its exit code.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NoConvergence { .. } | Error::InvalidDistribution(_)
        )
    }
}
