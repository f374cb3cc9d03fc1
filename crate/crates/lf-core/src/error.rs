use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by light-field construction, conversion and I/O.
#[derive(Debug, Error)]
pub enum LfError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("value outside [0, 1] in {0}")]
    ValueOutOfRange(&'static str),

    #[error("array extent ({rows}, {cols}) not divisible by angular size ({u}, {v})")]
    DimensionMismatch { rows: usize, cols: usize, u: usize, v: usize },

    #[error("central view undefined: angular size ({u}, {v}) must be odd")]
    EvenAngular { u: usize, v: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid disparity range [{d_min}, {d_max}]")]
    InvalidDisparityRange { d_min: f64, d_max: f64 },

    #[error("input not normalized to [0, 1]: observed [{min}, {max}]")]
    NonNormalized { min: f64, max: f64 },

    #[error("encoding dimension must be even and >= 2, got {0}")]
    OddEncodingDim(usize),

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("metadata inconsistent with directory contents: {0}")]
    MetaMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}
