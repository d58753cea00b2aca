use thiserror::Error;

/// Errors surfaced by the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid alignment error: {0}")]
    Alignment(String),

    #[error("unknown catalog identifier `{got}`; valid identifiers: {valid}")]
    UnknownCatalogId { got: String, valid: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
