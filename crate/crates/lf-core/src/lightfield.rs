use ndarray::{s, Array3, Array5, ArrayView3};

use crate::error::LfError;
use crate::layout;
use crate::Result;

/// A 4D light field `[U, V, H, W, C]` with values in `[0, 1]`.
///
/// `U x V` is the angular resolution (views), `H x W` the spatial resolution
/// of each view, `C` the channel count (1 or 3). The central view sits at
/// angular index `((U-1)/2, (V-1)/2)` and is only defined when both angular
/// extents are odd.
#[derive(Debug, Clone, PartialEq)]
pub struct LightField {
    data: Array5<f64>,
}

impl LightField {
    pub fn new(data: Array5<f64>) -> Result<Self> {
        let (u, v, h, w, c) = data.dim();
        if u == 0 || v == 0 || h == 0 || w == 0 {
            return Err(LfError::InvalidShape(format!(
                "light field axes must be nonzero, got [{u}, {v}, {h}, {w}, {c}]"
            )));
        }
        if c != 1 && c != 3 {
            return Err(LfError::InvalidShape(format!("channel count must be 1 or 3, got {c}")));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(LfError::NonFinite("light field"));
        }
        if !data.iter().all(|&x| (0.0..=1.0).contains(&x)) {
            return Err(LfError::ValueOutOfRange("light field"));
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &Array5<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array5<f64> {
        self.data
    }

    pub fn u(&self) -> usize {
        self.data.dim().0
    }

    pub fn v(&self) -> usize {
        self.data.dim().1
    }

    pub fn height(&self) -> usize {
        self.data.dim().2
    }

    pub fn width(&self) -> usize {
        self.data.dim().3
    }

    pub fn channels(&self) -> usize {
        self.data.dim().4
    }

    /// Central angular index; requires odd `U` and `V`.
    pub fn central_index(&self) -> Result<(usize, usize)> {
        let (u, v) = (self.u(), self.v());
        if u % 2 == 0 || v % 2 == 0 {
            return Err(LfError::EvenAngular { u, v });
        }
        Ok(((u - 1) / 2, (v - 1) / 2))
    }

    /// One sub-aperture view `[H, W, C]`.
    pub fn view(&self, p: usize, q: usize) -> Result<ArrayView3<'_, f64>> {
        if p >= self.u() || q >= self.v() {
            return Err(LfError::IndexOutOfRange(format!(
                "view ({p}, {q}) outside {}x{} angular grid",
                self.u(),
                self.v()
            )));
        }
        Ok(self.data.slice(s![p, q, .., .., ..]))
    }

    /// The central sub-aperture view as an owned `[H, W, C]` array.
    pub fn central_view(&self) -> Result<Array3<f64>> {
        let (pc, qc) = self.central_index()?;
        Ok(self.view(pc, qc)?.to_owned())
    }

    pub fn to_sai_grid(&self) -> SaiGridImage {
        SaiGridImage {
            data: layout::five_to_sai(&self.data),
            u: self.u(),
            v: self.v(),
        }
    }

    pub fn to_macropixel(&self) -> MacroPixelImage {
        MacroPixelImage {
            data: layout::five_to_macropixel(&self.data),
            u: self.u(),
            v: self.v(),
        }
    }
}

/// SAI mosaic `[U*H, V*W, C]`: views tiled side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct SaiGridImage {
    data: Array3<f64>,
    u: usize,
    v: usize,
}

impl SaiGridImage {
    pub fn from_parts(data: Array3<f64>, u: usize, v: usize) -> Result<Self> {
        let (rows, cols, _) = data.dim();
        if u == 0 || v == 0 || rows % u != 0 || cols % v != 0 {
            return Err(LfError::DimensionMismatch { rows, cols, u, v });
        }
        Ok(Self { data, u, v })
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn to_light_field(&self) -> Result<LightField> {
        LightField::new(layout::sai_to_five(&self.data, self.u, self.v)?)
    }

    pub fn to_macropixel(&self) -> Result<MacroPixelImage> {
        Ok(MacroPixelImage {
            data: layout::sai_to_macropixel_array(&self.data, self.u, self.v)?,
            u: self.u,
            v: self.v,
        })
    }
}

/// Macro-pixel mosaic `[U*H, V*W, C]`: each spatial site holds its `U x V`
/// block of angular samples. This is the layout the denoiser consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroPixelImage {
    data: Array3<f64>,
    u: usize,
    v: usize,
}

impl MacroPixelImage {
    pub fn from_parts(data: Array3<f64>, u: usize, v: usize) -> Result<Self> {
        let (rows, cols, _) = data.dim();
        if u == 0 || v == 0 || rows % u != 0 || cols % v != 0 {
            return Err(LfError::DimensionMismatch { rows, cols, u, v });
        }
        Ok(Self { data, u, v })
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn to_light_field(&self) -> Result<LightField> {
        LightField::new(layout::macropixel_to_five(&self.data, self.u, self.v)?)
    }

    pub fn to_sai_grid(&self) -> Result<SaiGridImage> {
        Ok(SaiGridImage {
            data: layout::macropixel_to_sai_array(&self.data, self.u, self.v)?,
            u: self.u,
            v: self.v,
        })
    }
}

/// Which epipolar slice to cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpiAxis {
    /// Fix `(p, s)`, vary `(q, t)`; returns `[V, W, C]`.
    Horizontal,
    /// Fix `(q, t)`, vary `(p, s)`; returns `[U, H, C]`.
    Vertical,
}

/// Cut an epipolar-plane image out of a light field. Scene depth shows up as
/// the slope of lines in the returned slice.
pub fn extract_epi(
    lf: &LightField,
    axis: EpiAxis,
    fixed_angular: usize,
    fixed_spatial: usize,
) -> Result<Array3<f64>> {
    let d = lf.data();
    match axis {
        EpiAxis::Horizontal => {
            if fixed_angular >= lf.u() || fixed_spatial >= lf.height() {
                return Err(LfError::IndexOutOfRange(format!(
                    "horizontal EPI at (p={fixed_angular}, s={fixed_spatial})"
                )));
            }
            Ok(d.slice(s![fixed_angular, .., fixed_spatial, .., ..]).to_owned())
        }
        EpiAxis::Vertical => {
            if fixed_angular >= lf.v() || fixed_spatial >= lf.width() {
                return Err(LfError::IndexOutOfRange(format!(
                    "vertical EPI at (q={fixed_angular}, t={fixed_spatial})"
                )));
            }
            Ok(d.slice(s![.., fixed_angular, .., fixed_spatial, ..]).to_owned())
        }
    }
}
