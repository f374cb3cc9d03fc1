//! The `refocus` command: shift-and-add integral over a stored light
//! field, written out as a PNG.

use std::path::Path;

use lf_analysis::{refocus, RefocusParams};
use lf_core::io::load_light_field;
use lf_core::Interp;
use ndarray::Array3;

use crate::imgio::save_image;
use crate::Result;

/// Refocus the light field under `lf_dir` at `slope` and write the result
/// to `out_path` as a 16-bit PNG.
pub fn cmd_refocus(lf_dir: &Path, slope: f64, out_path: &Path) -> Result<Array3<f64>> {
    let loaded = load_light_field(lf_dir)?;
    let img = refocus(&loaded.light_field, &RefocusParams { slope, interp: Interp::Bilinear })?;
    save_image(out_path, &img)?;
    Ok(img)
}
