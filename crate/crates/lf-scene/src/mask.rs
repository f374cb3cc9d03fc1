//! Analytic layer masks, evaluated at continuous reference-plane
//! coordinates so fractional disparities shift coverage exactly.

use serde::{Deserialize, Serialize};

use crate::error::SceneError;
use crate::Result;

/// Region of the reference plane a layer occupies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum MaskSpec {
    /// Covers everything; required for the back-most layer.
    Full,
    /// Half-open axis-aligned box `[top, bottom) x [left, right)` in pixels.
    Rect { top: f64, left: f64, bottom: f64, right: f64 },
    /// Closed disk around `(cy, cx)`.
    Disk { cy: f64, cx: f64, radius: f64 },
}

impl MaskSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MaskSpec::Full => Ok(()),
            MaskSpec::Rect { top, left, bottom, right } => {
                let vals = [top, left, bottom, right];
                if vals.iter().any(|v| !v.is_finite()) || top >= bottom || left >= right {
                    return Err(SceneError::InvalidSpec(format!(
                        "degenerate rect mask [{top}, {bottom}) x [{left}, {right})"
                    )));
                }
                Ok(())
            }
            MaskSpec::Disk { cy, cx, radius } => {
                if ![cy, cx, radius].iter().all(|v| v.is_finite()) || *radius <= 0.0 {
                    return Err(SceneError::InvalidSpec(format!(
                        "degenerate disk mask at ({cy}, {cx}) radius {radius}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Whether the layer covers the continuous position `(y, x)`.
    pub fn covers(&self, y: f64, x: f64) -> bool {
        match *self {
            MaskSpec::Full => true,
            MaskSpec::Rect { top, left, bottom, right } => {
                y >= top && y < bottom && x >= left && x < right
            }
            MaskSpec::Disk { cy, cx, radius } => {
                (y - cy).powi(2) + (x - cx).powi(2) <= radius * radius
            }
        }
    }
}
