use ndarray::Array2;

use crate::error::LfError;
use crate::Result;

/// Per-pixel disparity of the central view, in pixels of spatial shift per
/// unit angular step. Positive values shift samples toward larger `(s, t)`
/// for views below/right of center.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    data: Array2<f64>,
}

impl DisparityMap {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(LfError::InvalidShape(format!(
                "disparity map must be nonempty, got [{h}, {w}]"
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(LfError::NonFinite("disparity map"));
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }
}

/// Slack permitted on the `[0, 1]` normalization check before
/// [`rescale_inverse_depth`] rejects its input.
const NORM_TOL: f64 = 1e-6;

/// Affinely map a normalized inverse-depth map `z` in `[0, 1]` onto the
/// disparity interval `[d_min, d_max]`:
///
/// `d(s, t) = d_min + z(s, t) * (d_max - d_min)`
///
/// Choosing the interval at synthesis time is what steers the disparity
/// range of the generated light field. Inputs may stray outside `[0, 1]` by
/// up to 1e-6 (they are clamped); anything further is an error.
pub fn rescale_inverse_depth(z: &Array2<f64>, d_min: f64, d_max: f64) -> Result<DisparityMap> {
    if !d_min.is_finite() || !d_max.is_finite() || d_min >= d_max {
        return Err(LfError::InvalidDisparityRange { d_min, d_max });
    }
    if !z.iter().all(|x| x.is_finite()) {
        return Err(LfError::NonFinite("inverse depth"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in z.iter() {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo < -NORM_TOL || hi > 1.0 + NORM_TOL {
        return Err(LfError::NonNormalized { min: lo, max: hi });
    }
    DisparityMap::new(z.mapv(|x| d_min + x.clamp(0.0, 1.0) * (d_max - d_min)))
}
