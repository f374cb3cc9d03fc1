use ndarray::{Array3, Array5};

use crate::disparity::DisparityMap;
use crate::encoding::positional_encoding;
use crate::error::LfError;
use crate::layout;
use crate::warp::{warp_central_view, Interp};
use crate::Result;

/// Conditioning signal for the denoiser: per view, the warped central image
/// followed by that view's positional encoding, concatenated along channels.
///
/// Shape is `[U, V, H, W, C + dim]`. Image channels stay in `[0, 1]`; the
/// encoding channels lie in `[-2, 2]` and are constant over `(s, t)` within
/// each view.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSignal {
    data: Array5<f64>,
    image_channels: usize,
    pe_dim: usize,
}

impl ConditionSignal {
    pub fn data(&self) -> &Array5<f64> {
        &self.data
    }

    pub fn image_channels(&self) -> usize {
        self.image_channels
    }

    pub fn pe_dim(&self) -> usize {
        self.pe_dim
    }

    pub fn channels(&self) -> usize {
        self.image_channels + self.pe_dim
    }

    pub fn u(&self) -> usize {
        self.data.dim().0
    }

    pub fn v(&self) -> usize {
        self.data.dim().1
    }

    /// The signal in macro-pixel mosaic layout `[U*H, V*W, C + dim]`, the
    /// layout the denoiser concatenates with its noisy input.
    pub fn to_macropixel_array(&self) -> Array3<f64> {
        layout::five_to_macropixel(&self.data)
    }
}

fn assemble(warped: Array5<f64>, pe: Array3<f64>) -> ConditionSignal {
    let (u, v, h, w, c) = warped.dim();
    let dim = pe.dim().2;
    let mut data = Array5::zeros((u, v, h, w, c + dim));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h {
                for t in 0..w {
                    for ch in 0..c {
                        data[[p, q, s, t, ch]] = warped[[p, q, s, t, ch]];
                    }
                    for k in 0..dim {
                        data[[p, q, s, t, c + k]] = pe[[p, q, k]];
                    }
                }
            }
        }
    }
    ConditionSignal { data, image_channels: c, pe_dim: dim }
}

/// Build the conditioning signal from a central view `r` and its disparity:
/// warp `r` to every view, then append the angular positional encoding,
/// broadcast over the spatial grid.
pub fn build_condition(
    r: &Array3<f64>,
    d: &DisparityMap,
    u: usize,
    v: usize,
    dim: usize,
    interp: Interp,
) -> Result<ConditionSignal> {
    let warped = warp_central_view(r, d, u, v, interp)?;
    let pe = positional_encoding(u, v, dim)?;
    Ok(assemble(warped.into_data(), pe))
}

/// Degraded conditioning used to probe how much the geometry channels
/// matter: every view's image channels are the unwarped central view and the
/// positional-encoding channels are zeroed. The denoiser is left with no
/// cue that distinguishes one view from another.
pub fn build_condition_center_only(
    r: &Array3<f64>,
    u: usize,
    v: usize,
    dim: usize,
) -> Result<ConditionSignal> {
    if u == 0 || v == 0 || u % 2 == 0 || v % 2 == 0 {
        return Err(LfError::EvenAngular { u, v });
    }
    if dim < 2 || dim % 2 != 0 {
        return Err(LfError::OddEncodingDim(dim));
    }
    let (h, w, c) = r.dim();
    let mut warped = Array5::zeros((u, v, h, w, c));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h {
                for t in 0..w {
                    for ch in 0..c {
                        warped[[p, q, s, t, ch]] = r[[s, t, ch]];
                    }
                }
            }
        }
    }
    Ok(assemble(warped, Array3::zeros((u, v, dim))))
}
