//! Shift-and-add refocusing: the synthetic-aperture integral over views.

use lf_core::{sample_clamped, Interp, LightField};
use ndarray::Array3;

use crate::error::AnalysisError;
use crate::Result;

/// Parameters of the refocus integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefocusParams {
    /// Pixels of shift per unit angular offset — the disparity of the
    /// plane brought into focus.
    pub slope: f64,
    /// Interpolation used when sampling each view at shifted coordinates.
    pub interp: Interp,
}

/// Average all views after aligning the focal plane at `params.slope`:
/// view `(p, q)` is shifted by `(-(p - p_c)·slope, -(q - q_c)·slope)` with
/// edge-clamped sampling, and the shifted views are averaged.
pub fn refocus(lf: &LightField, params: &RefocusParams) -> Result<Array3<f64>> {
    if !params.slope.is_finite() {
        return Err(AnalysisError::InvalidParam(format!(
            "refocus slope must be finite, got {}",
            params.slope
        )));
    }
    let (pc, qc) = lf.central_index()?;
    let (h, w, c) = (lf.height(), lf.width(), lf.channels());
    let mut out = Array3::<f64>::zeros((h, w, c));
    let mut px = vec![0.0; c];
    for p in 0..lf.u() {
        let dy = (p as f64 - pc as f64) * params.slope;
        for q in 0..lf.v() {
            let dx = (q as f64 - qc as f64) * params.slope;
            let view = lf.view(p, q)?;
            for s in 0..h {
                for t in 0..w {
                    sample_clamped(&view, s as f64 + dy, t as f64 + dx, params.interp, &mut px);
                    for ch in 0..c {
                        out[[s, t, ch]] += px[ch];
                    }
                }
            }
        }
    }
    let scale = 1.0 / (lf.u() * lf.v()) as f64;
    out.mapv_inplace(|x| x * scale);
    Ok(out)
}
