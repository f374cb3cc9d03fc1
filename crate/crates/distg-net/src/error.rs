use thiserror::Error;

/// Errors from network construction, forward/backward passes, and
/// checkpoint I/O.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("unknown parameter: {0}")]
    MissingParam(String),

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
