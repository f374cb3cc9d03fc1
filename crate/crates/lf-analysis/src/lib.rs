//! Quality metrics and geometric diagnostics for light fields.
//!
//! The crate provides three families of tools:
//!
//! - [`psnr`] and [`ssim`] image-fidelity metrics, plus
//!   [`compare_light_fields`] which aggregates them into an [`LfReport`]
//!   with a per-view PSNR grid;
//! - [`estimate_epi_slope`], a registration-based estimator of the
//!   dominant epipolar-line slope, used to verify that synthesised light
//!   fields respect a requested disparity range;
//! - [`refocus`], the shift-and-add synthetic-aperture integral for
//!   post-capture focal-plane selection.
//!
//! All functions are pure and safe to call from parallel workers.

mod error;
mod quality;
mod refocus;
mod report;
mod slope;

pub use error::AnalysisError;
pub use quality::{psnr, ssim, SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW};
pub use refocus::{refocus, RefocusParams};
pub use report::{compare_light_fields, LfReport};
pub use slope::{estimate_epi_slope, SpatialRegion};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, AnalysisError>;
