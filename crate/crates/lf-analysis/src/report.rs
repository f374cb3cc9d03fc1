//! Aggregated fidelity report for a pair of light fields.

use lf_core::LightField;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::quality::{psnr, ssim};
use crate::Result;

/// Fidelity summary of a reconstructed light field against a reference.
///
/// The headline `psnr`/`ssim` figures are computed over the sub-aperture
/// mosaic; `psnr_view_mean` averages the per-view values instead, and
/// `per_view_psnr[p][q]` exposes the full grid for heatmap rendering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LfReport {
    /// PSNR of the sub-aperture mosaic, in dB.
    pub psnr: f64,
    /// SSIM of the sub-aperture mosaic.
    pub ssim: f64,
    /// Mean of the per-view PSNR values, in dB.
    pub psnr_view_mean: f64,
    /// PSNR of each view, indexed `[p][q]`.
    pub per_view_psnr: Vec<Vec<f64>>,
}

/// Compare two light fields of identical geometry at unit peak.
pub fn compare_light_fields(a: &LightField, b: &LightField) -> Result<LfReport> {
    if a.data().dim() != b.data().dim() {
        return Err(AnalysisError::ShapeMismatch {
            left: a.data().shape().to_vec(),
            right: b.data().shape().to_vec(),
        });
    }
    let mosaic_a = a.to_sai_grid();
    let mosaic_b = b.to_sai_grid();
    let mosaic_psnr = psnr(mosaic_a.data().view(), mosaic_b.data().view(), 1.0)?;
    let mosaic_ssim = ssim(mosaic_a.data().view(), mosaic_b.data().view())?;

    let mut per_view = vec![vec![0.0; a.v()]; a.u()];
    let mut sum = 0.0;
    for p in 0..a.u() {
        for q in 0..a.v() {
            let value = psnr(a.view(p, q)?, b.view(p, q)?, 1.0)?;
            per_view[p][q] = value;
            sum += value;
        }
    }
    Ok(LfReport {
        psnr: mosaic_psnr,
        ssim: mosaic_ssim,
        psnr_view_mean: sum / (a.u() * a.v()) as f64,
        per_view_psnr: per_view,
    })
}
