use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("configuration type {config} does not match robot model {robot}")]
    ModelMismatch { config: String, robot: String },

    #[error("parameter `{name}` = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no valid configuration found after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("expert retry cap of {cap} draws exhausted after {solved} solved queries")]
    ExpertExhausted { cap: usize, solved: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("malformed {what} file: {message}")]
    Format { what: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn format(what: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            message: message.into(),
        }
    }
}
