use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: schema mismatch: {reason}")]
    Schema {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("duplicate paper id `{0}`")]
    DuplicateId(String),
    #[error("unknown paper id `{0}`")]
    UnknownId(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("no paper carries keyword `{0}`")]
    NoKeywordMatch(String),
    #[error("corrupt snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by the caller's arguments rather than the data.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::InvalidParameter(_) => true,
            Error::Stage { source, .. } => source.is_usage(),
            _ => false,
        }
    }

    /// Process exit code: 1 for usage errors, 2 for data errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_usage() {
            1
        } else {
            2
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
