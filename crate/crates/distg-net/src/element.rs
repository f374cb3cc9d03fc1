use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, NumCast, ToPrimitive};

/// Scalar type the network computes in.
///
/// Training runs in `f32` for speed; gradient verification runs the same
/// code in `f64` so finite differences resolve below 1e-4 relative error.
pub trait Element:
    LinalgScalar + Float + ScalarOperand + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 conversion")
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("f64 conversion")
    }
}

impl Element for f32 {}
impl Element for f64 {}
