use lf_core::ConditionSignal;
use ndarray::Array3;

use crate::Result;

/// A conditional noise estimator.
///
/// `x_t` is the noisy light field in SAI mosaic layout `[U*H, V*W, C]`; the
/// return value is the estimated noise in the same layout and shape.
/// Implementations that operate on another layout (such as the macro-pixel
/// mosaic) reshuffle internally in both directions; callers always see SAI.
pub trait Denoiser {
    fn predict_noise(&self, x_t: &Array3<f64>, t: usize, c: &ConditionSignal)
        -> Result<Array3<f64>>;
}
