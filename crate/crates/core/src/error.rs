use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("schema error in {source_name}: missing mandatory column `{column}`")]
    MissingColumn { source_name: String, column: String },

    #[error("row error at line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("cannot normalize `{metric}`: denominator `{denominator}` is zero")]
    Normalization { metric: String, denominator: String },

    #[error("insufficient data: {n} samples, at least {required} required")]
    InsufficientData { n: usize, required: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scoring error: metric `{0}` has no fitted parameters")]
    MissingParams(String),

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("model has no splits; feature importances are undefined")]
    NoSplits,

    #[error("R2 undefined: targets are constant")]
    UndefinedR2,

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line frontend.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 1,
            Error::Numerical(_) | Error::NoSplits | Error::UndefinedR2 => 3,
            _ => 2,
        }
    }
}
