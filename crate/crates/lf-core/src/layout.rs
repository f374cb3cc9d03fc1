//! Exact layout conversions between the three mosaics of a light field.
//!
//! For a field `a[p, q, s, t, ch]` with angular size `U x V` and spatial size
//! `H x W`:
//!
//! * SAI grid:     `sai[p*H + s, q*W + t, ch] = a[p, q, s, t, ch]`
//! * macro-pixel:  `mp[s*U + p, t*V + q, ch] = a[p, q, s, t, ch]`
//!
//! Both are bijective; every function here moves values without touching them,
//! so round trips are bit-exact.

use ndarray::{Array3, Array5};

use crate::error::LfError;
use crate::Result;

/// Flatten a 5-axis field into the SAI mosaic (views tiled side by side).
pub fn five_to_sai(a: &Array5<f64>) -> Array3<f64> {
    let (u, v, h, w, c) = a.dim();
    let mut out = Array3::zeros((u * h, v * w, c));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h {
                for t in 0..w {
                    for ch in 0..c {
                        out[[p * h + s, q * w + t, ch]] = a[[p, q, s, t, ch]];
                    }
                }
            }
        }
    }
    out
}

/// Inverse of [`five_to_sai`].
pub fn sai_to_five(a: &Array3<f64>, u: usize, v: usize) -> Result<Array5<f64>> {
    let (rows, cols, c) = a.dim();
    check_divisible(rows, cols, u, v)?;
    let (h, w) = (rows / u, cols / v);
    let mut out = Array5::zeros((u, v, h, w, c));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h {
                for t in 0..w {
                    for ch in 0..c {
                        out[[p, q, s, t, ch]] = a[[p * h + s, q * w + t, ch]];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Flatten a 5-axis field into the macro-pixel mosaic (each spatial site holds
/// its `U x V` block of angular samples).
pub fn five_to_macropixel(a: &Array5<f64>) -> Array3<f64> {
    let (u, v, h, w, c) = a.dim();
    let mut out = Array3::zeros((u * h, v * w, c));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h {
                for t in 0..w {
                    for ch in 0..c {
                        out[[s * u + p, t * v + q, ch]] = a[[p, q, s, t, ch]];
                    }
                }
            }
        }
    }
    out
}

/// Inverse of [`five_to_macropixel`].
pub fn macropixel_to_five(a: &Array3<f64>, u: usize, v: usize) -> Result<Array5<f64>> {
    let (rows, cols, c) = a.dim();
    check_divisible(rows, cols, u, v)?;
    let (h, w) = (rows / u, cols / v);
    let mut out = Array5::zeros((u, v, h, w, c));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h {
                for t in 0..w {
                    for ch in 0..c {
                        out[[p, q, s, t, ch]] = a[[s * u + p, t * v + q, ch]];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Rearrange a SAI mosaic directly into the macro-pixel mosaic.
pub fn sai_to_macropixel_array(a: &Array3<f64>, u: usize, v: usize) -> Result<Array3<f64>> {
    Ok(five_to_macropixel(&sai_to_five(a, u, v)?))
}

/// Rearrange a macro-pixel mosaic directly into the SAI mosaic.
pub fn macropixel_to_sai_array(a: &Array3<f64>, u: usize, v: usize) -> Result<Array3<f64>> {
    Ok(five_to_sai(&macropixel_to_five(a, u, v)?))
}

fn check_divisible(rows: usize, cols: usize, u: usize, v: usize) -> Result<()> {
    if u == 0 || v == 0 || rows % u != 0 || cols % v != 0 {
        return Err(LfError::DimensionMismatch { rows, cols, u, v });
    }
    Ok(())
}
