use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Grammar violation in a text format; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed tokens that violate a structural rule of the format.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// Non-finite or otherwise unusable numeric data.
    #[error("data error at line {line}: {message}")]
    Data { line: usize, message: String },

    #[error("unsupported file version at line {line}: {message}")]
    UnsupportedVersion { line: usize, message: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("refused write: {0}")]
    RefusedWrite(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Line number carried by text-format errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Parse { line, .. }
            | Error::Format { line, .. }
            | Error::Data { line, .. }
            | Error::UnsupportedVersion { line, .. } => Some(*line),
            _ => None,
        }
    }
}
