use ndarray::{Array3, Array5, ArrayView3};

use crate::disparity::DisparityMap;
use crate::error::LfError;
use crate::lightfield::LightField;
use crate::Result;

/// Interpolation kernel for fractional sample coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interp {
    /// Round to the closest pixel (ties round toward larger indices).
    Nearest,
    /// Separable linear interpolation between the four surrounding pixels.
    #[default]
    Bilinear,
}

/// Sample `img` at the continuous position `(y, x)`, writing one value per
/// channel into `out`. Coordinates outside the image clamp to the border,
/// which is equivalent to replicate padding for both kernels.
///
/// At exactly integral in-range coordinates both kernels return the stored
/// pixel bit-exactly.
pub fn sample_clamped(img: &ArrayView3<'_, f64>, y: f64, x: f64, interp: Interp, out: &mut [f64]) {
    let (h, w, c) = img.dim();
    debug_assert_eq!(out.len(), c);
    let yc = y.clamp(0.0, (h - 1) as f64);
    let xc = x.clamp(0.0, (w - 1) as f64);
    match interp {
        Interp::Nearest => {
            let i = ((yc + 0.5).floor() as usize).min(h - 1);
            let j = ((xc + 0.5).floor() as usize).min(w - 1);
            for (ch, o) in out.iter_mut().enumerate() {
                *o = img[[i, j, ch]];
            }
        }
        Interp::Bilinear => {
            let y0 = yc.floor();
            let x0 = xc.floor();
            let fy = yc - y0;
            let fx = xc - x0;
            let i0 = y0 as usize;
            let j0 = x0 as usize;
            let i1 = (i0 + 1).min(h - 1);
            let j1 = (j0 + 1).min(w - 1);
            for (ch, o) in out.iter_mut().enumerate() {
                let top = (1.0 - fx) * img[[i0, j0, ch]] + fx * img[[i0, j1, ch]];
                let bot = (1.0 - fx) * img[[i1, j0, ch]] + fx * img[[i1, j1, ch]];
                *o = (1.0 - fy) * top + fy * bot;
            }
        }
    }
}

/// Synthesize a `U x V` light field by warping the central view `r` with the
/// per-pixel disparity `d`.
///
/// View `(p_i, q_i)` at spatial position `(s, t)` samples `r` at
///
/// `(s + (p_c - p_i) * d(s, t),  t + (q_c - q_i) * d(s, t))`
///
/// where `(p_c, q_c)` is the central view index. The central view itself is
/// reproduced bit-exactly for any disparity; out-of-range coordinates clamp
/// to the border. Occlusions are not modelled — each view is an independent
/// resampling of `r`.
pub fn warp_central_view(
    r: &Array3<f64>,
    d: &DisparityMap,
    u: usize,
    v: usize,
    interp: Interp,
) -> Result<LightField> {
    if u == 0 || v == 0 || u % 2 == 0 || v % 2 == 0 {
        return Err(LfError::EvenAngular { u, v });
    }
    let (h, w, c) = r.dim();
    if (h, w) != d.data().dim() {
        return Err(LfError::InvalidShape(format!(
            "image is {h}x{w} but disparity map is {}x{}",
            d.height(),
            d.width()
        )));
    }
    let (pc, qc) = ((u - 1) / 2, (v - 1) / 2);
    let rv = r.view();
    let mut out = Array5::zeros((u, v, h, w, c));
    let mut px = vec![0.0; c];
    for p in 0..u {
        let dp = (pc as f64) - (p as f64);
        for q in 0..v {
            let dq = (qc as f64) - (q as f64);
            for s in 0..h {
                for t in 0..w {
                    let disp = d.data()[[s, t]];
                    sample_clamped(
                        &rv,
                        s as f64 + dp * disp,
                        t as f64 + dq * disp,
                        interp,
                        &mut px,
                    );
                    for ch in 0..c {
                        out[[p, q, s, t, ch]] = px[ch];
                    }
                }
            }
        }
    }
    LightField::new(out)
}
