use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed image: {message}")]
    MalformedImage { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    UnsupportedImage { path: PathBuf, message: String },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("unknown land-use label {0:?}")]
    UnknownLabel(String),
    #[error("word {0:?} is not in the vocabulary")]
    UnknownWord(String),
    #[error("parcel {0} has no valid samples")]
    EmptyParcel(u32),
    #[error("word counts are all zero")]
    EmptyCounts,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("labeler protocol violation: {0}")]
    Protocol(String),
    #[error("labeler did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}
