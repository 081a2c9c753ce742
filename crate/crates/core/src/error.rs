use std::path::PathBuf;

use thiserror::Error;

use crate::smiles::SmilesError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    /// The label column holds fewer than two classes, so no binary classifier can be trained.
    #[error("single-class dataset: label column holds only {0}")]
    SingleClass(String),

    #[error("label value `{value}` on line {line} is not mapped to +1 or -1")]
    UnknownLabel { value: String, line: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("class too small: {0}")]
    ClassTooSmall(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Smiles(#[from] SmilesError),

    #[error("malformed kernel file: {0}")]
    Format(String),

    /// A configuration value failed validation; `field` is a JSON-style path.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
