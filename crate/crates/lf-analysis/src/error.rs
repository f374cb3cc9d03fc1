//! Error type for the analysis crate.

use thiserror::Error;

/// Errors reported by metrics, slope estimation, and refocusing.
#[derive(Debug, Error)]
pub enum AnalysisError {
    /// The two inputs of a comparison do not have the same shape.
    #[error("shape mismatch: left {left:?} vs right {right:?}")]
    ShapeMismatch {
        /// Shape of the first operand.
        left: Vec<usize>,
        /// Shape of the second operand.
        right: Vec<usize>,
    },

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The image is smaller than the analysis window.
    #[error("image {h}x{w} is smaller than the {window}x{window} window")]
    WindowTooLarge {
        /// Image height.
        h: usize,
        /// Image width.
        w: usize,
        /// Window side length.
        window: usize,
    },

    /// The region offers no texture to lock onto; displacement is unobservable.
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    /// Error bubbled up from the core light-field layer.
    #[error(transparent)]
    Core(#[from] lf_core::LfError),
}
