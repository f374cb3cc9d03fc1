use std::path::PathBuf;

use thiserror::Error;

/// Errors from scene specification, rendering, and dataset I/O.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),

    #[error("invalid patch geometry: {0}")]
    InvalidPatch(String),

    #[error("unsupported depth input {path}: {reason}")]
    DepthFormat { path: PathBuf, reason: String },

    #[error("invalid export: {0}")]
    InvalidExport(String),

    #[error(transparent)]
    Core(#[from] lf_core::LfError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
