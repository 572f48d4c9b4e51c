use std::path::PathBuf;

use thiserror::Error;

use crate::model::BillboardId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown billboard id {0}")]
    UnknownBillboard(BillboardId),

    #[error("billboard {0} is already part of the selection")]
    AlreadySelected(BillboardId),

    #[error("invalid probability model: {0}")]
    InvalidModel(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("budget quantum {quantum} does not divide {what} ({value})")]
    Quantization {
        quantum: u64,
        what: String,
        value: u64,
    },

    #[error("exact search refused: {size} candidates exceed the cap of {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
