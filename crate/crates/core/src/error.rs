use std::path::PathBuf;

/// Errors produced anywhere in the optimization toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke a documented precondition (dimension mismatch, out-of-bounds
    /// input, inverted bounds, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Unknown problem identifier or other catalog lookup failure.
    #[error("catalog error: {0}")]
    Catalog(String),
    /// Invalid run or experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    /// A quality indicator is undefined for the given input.
    #[error("metric error: {0}")]
    Metric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A result matrix is missing cells required for a table.
    #[error("incomplete results, missing cells:\n{}", .0.join("\n"))]
    MissingCells(Vec<String>),
    #[error("reference front for {problem} not found at {}", .path.display())]
    MissingReferenceFront { problem: String, path: PathBuf },
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
