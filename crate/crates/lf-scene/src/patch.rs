//! Spatial patch extraction for training: angular extent untouched, the
//! ground-truth disparity cropped congruently with the views.

use ndarray::{s, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use lf_core::{DisparityMap, LightField};

use crate::error::SceneError;
use crate::Result;

/// One supervised example: a light-field crop, its central view, and the
/// exact disparity of that window.
#[derive(Debug, Clone)]
pub struct TrainingPatch {
    pub lf_patch: LightField,
    pub center: Array3<f64>,
    pub gt_disparity: DisparityMap,
}

/// Crops `patch x patch` windows on a stride grid, optionally jittered by
/// up to `jitter` pixels (clamped so windows stay inside the frame). With
/// `jitter = 0` the grid tiles deterministically and `seed` is unused.
pub fn crop_patches(
    lf: &LightField,
    disparity: &DisparityMap,
    patch: usize,
    stride: usize,
    jitter: usize,
    seed: u64,
) -> Result<Vec<TrainingPatch>> {
    let (h, w) = (lf.height(), lf.width());
    if patch == 0 || patch > h.min(w) {
        return Err(SceneError::InvalidPatch(format!(
            "patch {patch} does not fit a {h}x{w} frame"
        )));
    }
    if stride == 0 {
        return Err(SceneError::InvalidPatch("stride must be >= 1".into()));
    }
    if disparity.data().dim() != (h, w) {
        return Err(SceneError::InvalidPatch(format!(
            "disparity map {}x{} does not match {h}x{w} views",
            disparity.height(),
            disparity.width()
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut py = 0;
    while py + patch <= h {
        let mut px = 0;
        while px + patch <= w {
            let (mut y0, mut x0) = (py, px);
            if jitter > 0 {
                y0 += rng.random_range(0..=jitter.min(h - patch - py));
                x0 += rng.random_range(0..=jitter.min(w - patch - px));
            }
            let lf_patch = LightField::new(
                lf.data()
                    .slice(s![.., .., y0..y0 + patch, x0..x0 + patch, ..])
                    .to_owned(),
            )?;
            let gt = DisparityMap::new(
                disparity.data().slice(s![y0..y0 + patch, x0..x0 + patch]).to_owned(),
            )?;
            let center = lf_patch.central_view()?;
            out.push(TrainingPatch { lf_patch, center, gt_disparity: gt });
            px += stride;
        }
        py += stride;
    }
    Ok(out)
}
