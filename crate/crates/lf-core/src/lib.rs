//! Core light-field data model.
//!
//! A 4D light field is stored as a 5-axis array `[U, V, H, W, C]`: two angular
//! axes (view row `p`, view column `q`), two spatial axes (`s`, `t`) and a
//! channel axis. This crate owns the exact layout conversions between the
//! sub-aperture (SAI) mosaic and the macro-pixel mosaic, disparity rescaling,
//! backward warping of the central view, the view-level positional encoding,
//! and the assembly of the conditioning signal used by the diffusion model.
//!
//! All operations are pure functions on immutable inputs.

mod condition;
mod disparity;
mod encoding;
mod error;
mod lightfield;
pub mod io;
pub mod layout;
mod warp;

pub use condition::{build_condition, build_condition_center_only, ConditionSignal};
pub use disparity::{rescale_inverse_depth, DisparityMap};
pub use encoding::{positional_encoding, DEFAULT_PE_DIM};
pub use error::LfError;
pub use lightfield::{extract_epi, EpiAxis, LightField, MacroPixelImage, SaiGridImage};
pub use warp::{sample_clamped, warp_central_view, Interp};

pub type Result<T> = std::result::Result<T, LfError>;
