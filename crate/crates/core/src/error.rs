use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by dataset ingestion, training, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("non-numeric value at row {row}, col {col}: {value:?}")]
    NonNumeric {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("non-finite value at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },

    #[error("label column {0:?} not found")]
    LabelColumnNotFound(String),

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("class {class} has {size} samples, too small to stratify at fraction {fraction}")]
    ClassTooSmall {
        class: usize,
        size: usize,
        fraction: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite {what} at iteration {iteration}")]
    Numeric { what: String, iteration: usize },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code contract: 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
