use ndarray::Array3;

use crate::error::LfError;
use crate::Result;

/// Default channel count of the angular positional encoding.
pub const DEFAULT_PE_DIM: usize = 16;

/// View-level positional encoding over a `U x V` angular grid, returned as
/// `[U, V, dim]`.
///
/// Channel `2i` holds `sin(p / 10000^(2i/dim)) + sin(q / 10000^(2i/dim))`
/// and channel `2i+1` holds `cos(p / 10000^((2i+1)/dim)) +
/// cos(q / 10000^((2i+1)/dim))`, with angular indices counted from zero.
///
/// Note the formula is symmetric in `(p, q)`: transposed view pairs share an
/// encoding. Values lie in `[-2, 2]`.
pub fn positional_encoding(u: usize, v: usize, dim: usize) -> Result<Array3<f64>> {
    if dim < 2 || dim % 2 != 0 {
        return Err(LfError::OddEncodingDim(dim));
    }
    if u == 0 || v == 0 {
        return Err(LfError::InvalidShape(format!("angular grid must be nonzero, got {u}x{v}")));
    }
    let mut pe = Array3::zeros((u, v, dim));
    for p in 0..u {
        for q in 0..v {
            for k in 0..dim {
                let omega = 10000f64.powf(k as f64 / dim as f64);
                let (a, b) = (p as f64 / omega, q as f64 / omega);
                pe[[p, q, k]] = if k % 2 == 0 {
                    a.sin() + b.sin()
                } else {
                    a.cos() + b.cos()
                };
            }
        }
    }
    Ok(pe)
}
