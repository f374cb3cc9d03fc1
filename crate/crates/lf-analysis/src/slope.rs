//! EPI-slope estimation by sub-pixel registration against the central view.
//!
//! A scene plane at disparity `d` displaces view `(p, q)` by
//! `((p_c - p)·d, (q_c - q)·d)` pixels relative to the central view, so the
//! slope of an epipolar line equals the per-view displacement divided by
//! the angular offset.  The estimator measures the two-dimensional
//! displacement of every off-centre view with an integer SSD search over a
//! square shift grid plus per-axis parabolic sub-pixel refinement, then
//! fits the stacked displacement components against their angular offsets
//! by least squares through the origin.

use lf_core::LightField;
use ndarray::ArrayView3;

use crate::error::AnalysisError;
use crate::Result;

/// Rectangular spatial window the estimator restricts itself to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpatialRegion {
    /// First row of the region.
    pub top: usize,
    /// First column of the region.
    pub left: usize,
    /// Number of rows.
    pub height: usize,
    /// Number of columns.
    pub width: usize,
}

impl SpatialRegion {
    /// The full spatial extent of an `h`-by-`w` frame.
    pub fn full(h: usize, w: usize) -> Self {
        Self { top: 0, left: 0, height: h, width: w }
    }
}

/// Minimum region side length; smaller windows leave no room for the
/// search overlap.
const MIN_REGION_EXTENT: usize = 8;

/// Mean squared difference between `view` and `central` with `central`
/// looked up `(dy, dx)` pixels away.  Out-of-frame lookups are skipped
/// and the sum renormalised.
fn shifted_msd(
    view: &ArrayView3<f64>,
    central: &ArrayView3<f64>,
    region: &SpatialRegion,
    dy: i64,
    dx: i64,
) -> Option<f64> {
    let (h, w, c) = central.dim();
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in region.top..region.top + region.height {
        for t in region.left..region.left + region.width {
            let (cs, ct) = (s as i64 + dy, t as i64 + dx);
            if cs < 0 || ct < 0 || cs >= h as i64 || ct >= w as i64 {
                continue;
            }
            for ch in 0..c {
                let d = view[[s, t, ch]] - central[[cs as usize, ct as usize, ch]];
                sum += d * d;
            }
            count += 1;
        }
    }
    (count > 0).then(|| sum / (count * c) as f64)
}

/// Two-dimensional displacement of `view` relative to `central`, in
/// pixels.  Integer SSD minimum over a square shift grid, refined axis by
/// axis with a parabola through the neighbouring grid values; an exact
/// (zero-error) match short-circuits the refinement.
fn register(
    view: &ArrayView3<f64>,
    central: &ArrayView3<f64>,
    region: &SpatialRegion,
    max_shift: i64,
) -> Option<(f64, f64)> {
    let m = max_shift;
    let side = (2 * m + 1) as usize;
    let mut grid = vec![vec![None; side]; side];
    let mut best: Option<(i64, i64, f64)> = None;
    for ky in -m..=m {
        for kx in -m..=m {
            if let Some(msd) = shifted_msd(view, central, region, ky, kx) {
                grid[(ky + m) as usize][(kx + m) as usize] = Some(msd);
                if best.map_or(true, |(_, _, b)| msd < b) {
                    best = Some((ky, kx, msd));
                }
            }
        }
    }
    let (ky, kx, s0) = best?;
    if s0 < 1e-18 {
        return Some((ky as f64, kx as f64));
    }
    let at = |y: i64, x: i64| -> Option<f64> {
        (y >= -m && y <= m && x >= -m && x <= m)
            .then(|| grid[(y + m) as usize][(x + m) as usize])
            .flatten()
    };
    let refine = |sm: Option<f64>, sp: Option<f64>, k: i64| -> f64 {
        match (sm, sp) {
            (Some(sm), Some(sp)) => {
                let denom = sm - 2.0 * s0 + sp;
                if denom.abs() < 1e-18 {
                    k as f64
                } else {
                    k as f64 + 0.5 * (sm - sp) / denom
                }
            }
            _ => k as f64,
        }
    };
    Some((
        refine(at(ky - 1, kx), at(ky + 1, kx), ky),
        refine(at(ky, kx - 1), at(ky, kx + 1), kx),
    ))
}

/// Estimate the dominant EPI slope of `lf` over `region`, in pixels of
/// displacement per unit angular offset.
///
/// The region must be occlusion-free for the estimate to be meaningful.
/// Textureless regions are rejected with a degenerate-region error.
pub fn estimate_epi_slope(lf: &LightField, region: &SpatialRegion) -> Result<f64> {
    let (h, w) = (lf.height(), lf.width());
    if region.height < MIN_REGION_EXTENT
        || region.width < MIN_REGION_EXTENT
        || region.top + region.height > h
        || region.left + region.width > w
    {
        return Err(AnalysisError::InvalidParam(format!(
            "region {region:?} must lie inside the {h}x{w} frame with extent >= {MIN_REGION_EXTENT}"
        )));
    }
    let (pc, qc) = lf.central_index()?;
    let central = lf.view(pc, qc)?;

    let n = (region.height * region.width * lf.channels()) as f64;
    let mean = central
        .slice(ndarray::s![
            region.top..region.top + region.height,
            region.left..region.left + region.width,
            ..
        ])
        .sum()
        / n;
    let var = central
        .slice(ndarray::s![
            region.top..region.top + region.height,
            region.left..region.left + region.width,
            ..
        ])
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<f64>()
        / n;
    if var < 1e-10 {
        return Err(AnalysisError::DegenerateRegion(format!(
            "central-view variance {var:.3e} is below the texture threshold"
        )));
    }

    let max_shift = (region.height.min(region.width) / 2) as i64;
    let mut sum_xy = 0.0;
    let mut sum_xx = 0.0;
    for p in 0..lf.u() {
        for q in 0..lf.v() {
            if p == pc && q == qc {
                continue;
            }
            let oy = pc as f64 - p as f64;
            let ox = qc as f64 - q as f64;
            let view = lf.view(p, q)?;
            if let Some((dy, dx)) = register(&view, &central, region, max_shift) {
                sum_xy += oy * dy + ox * dx;
                sum_xx += oy * oy + ox * ox;
            }
        }
    }
    if sum_xx == 0.0 {
        return Err(AnalysisError::DegenerateRegion(
            "no off-centre views to register".into(),
        ));
    }
    Ok(sum_xy / sum_xx)
}
