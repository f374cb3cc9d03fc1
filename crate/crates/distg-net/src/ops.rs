//! Parameter-free tensor operations: activation, nearest-neighbour
//! upsampling, and the view-aware pooling pair used between scales.
//!
//! All arrays are macro-pixel ordered `[rows, cols, channels]` where
//! `rows = angular * view_rows`. The view-aware pair rescales the per-view
//! spatial lattice while leaving the angular arrangement untouched.

use ndarray::Array3;

use crate::element::Element;
use crate::error::NetError;
use crate::Result;

/// Negative-side slope of the shared activation.
pub const LEAKY_SLOPE: f64 = 0.1;

/// Leaky rectifier, `y = x` for `x >= 0` and `y = slope * x` otherwise.
pub fn leaky_relu<E: Element>(x: &Array3<E>) -> Array3<E> {
    let s = E::from_f64(LEAKY_SLOPE);
    x.mapv(|v| if v >= E::zero() { v } else { s * v })
}

/// Backward of [`leaky_relu`]; `x` is the activation input.
pub fn leaky_relu_backward<E: Element>(x: &Array3<E>, dy: &Array3<E>) -> Array3<E> {
    let s = E::from_f64(LEAKY_SLOPE);
    let mut dx = dy.clone();
    ndarray::Zip::from(&mut dx).and(x).for_each(|d, &v| {
        if v < E::zero() {
            *d = *d * s;
        }
    });
    dx
}

/// Nearest-neighbour upsampling by integer factors `(fr, fc)`.
pub fn upsample_nearest<E: Element>(x: &Array3<E>, fr: usize, fc: usize) -> Array3<E> {
    let (rows, cols, ch) = x.dim();
    Array3::from_shape_fn((rows * fr, cols * fc, ch), |(r, c, k)| {
        x[[r / fr, c / fc, k]]
    })
}

/// Backward of [`upsample_nearest`]: each input site accumulates the
/// gradient of every output site it was copied to.
pub fn upsample_nearest_backward<E: Element>(
    dy: &Array3<E>,
    fr: usize,
    fc: usize,
) -> Result<Array3<E>> {
    let (rows, cols, ch) = dy.dim();
    if rows % fr != 0 || cols % fc != 0 {
        return Err(NetError::ShapeMismatch(format!(
            "upsample backward: {rows}x{cols} not divisible by factors {fr}x{fc}"
        )));
    }
    let mut dx = Array3::zeros((rows / fr, cols / fc, ch));
    for r in 0..rows {
        for c in 0..cols {
            for k in 0..ch {
                dx[[r / fr, c / fc, k]] = dx[[r / fr, c / fc, k]] + dy[[r, c, k]];
            }
        }
    }
    Ok(dx)
}

fn check_view_grid(rows: usize, cols: usize, angular: usize) -> Result<(usize, usize)> {
    if angular == 0 || rows % angular != 0 || cols % angular != 0 {
        return Err(NetError::ShapeMismatch(format!(
            "macro-pixel grid {rows}x{cols} is not a multiple of angular size {angular}"
        )));
    }
    Ok((rows / angular, cols / angular))
}

/// Halves the per-view spatial resolution by 2x2 mean pooling applied
/// independently inside every angular view of the macro-pixel grid.
///
/// With views of size `h x w`, output site `(s, t)` of a view averages the
/// four input sites `(2s + i, 2t + j)` of the same view.
pub fn view_pool2<E: Element>(x: &Array3<E>, angular: usize) -> Result<Array3<E>> {
    let (rows, cols, ch) = x.dim();
    let (h, w) = check_view_grid(rows, cols, angular)?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NetError::ShapeMismatch(format!(
            "per-view extent {h}x{w} is not divisible by 2"
        )));
    }
    let quarter = E::from_f64(0.25);
    let mut y = Array3::zeros((rows / 2, cols / 2, ch));
    for s in 0..h / 2 {
        for t in 0..w / 2 {
            for p in 0..angular {
                for q in 0..angular {
                    for k in 0..ch {
                        let mut acc = E::zero();
                        for i in 0..2 {
                            for j in 0..2 {
                                acc = acc
                                    + x[[(2 * s + i) * angular + p, (2 * t + j) * angular + q, k]];
                            }
                        }
                        y[[s * angular + p, t * angular + q, k]] = acc * quarter;
                    }
                }
            }
        }
    }
    Ok(y)
}

/// Backward of [`view_pool2`].
pub fn view_pool2_backward<E: Element>(dy: &Array3<E>, angular: usize) -> Result<Array3<E>> {
    let (rows, cols, ch) = dy.dim();
    let (h, w) = check_view_grid(rows, cols, angular)?;
    let quarter = E::from_f64(0.25);
    let mut dx = Array3::zeros((rows * 2, cols * 2, ch));
    for s in 0..h {
        for t in 0..w {
            for p in 0..angular {
                for q in 0..angular {
                    for k in 0..ch {
                        let g = dy[[s * angular + p, t * angular + q, k]] * quarter;
                        for i in 0..2 {
                            for j in 0..2 {
                                dx[[(2 * s + i) * angular + p, (2 * t + j) * angular + q, k]] = g;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(dx)
}

/// Doubles the per-view spatial resolution by nearest-neighbour copying
/// inside every angular view of the macro-pixel grid.
pub fn view_up2<E: Element>(x: &Array3<E>, angular: usize) -> Result<Array3<E>> {
    let (rows, cols, ch) = x.dim();
    check_view_grid(rows, cols, angular)?;
    let mut y = Array3::zeros((rows * 2, cols * 2, ch));
    let (h, w) = (rows / angular, cols / angular);
    for s in 0..2 * h {
        for t in 0..2 * w {
            for p in 0..angular {
                for q in 0..angular {
                    for k in 0..ch {
                        y[[s * angular + p, t * angular + q, k]] =
                            x[[(s / 2) * angular + p, (t / 2) * angular + q, k]];
                    }
                }
            }
        }
    }
    Ok(y)
}

/// Backward of [`view_up2`]: sums the 2x2 per-view output block feeding
/// each input site.
pub fn view_up2_backward<E: Element>(dy: &Array3<E>, angular: usize) -> Result<Array3<E>> {
    let (rows, cols, ch) = dy.dim();
    let (h, w) = check_view_grid(rows, cols, angular)?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NetError::ShapeMismatch(format!(
            "per-view extent {h}x{w} is not divisible by 2"
        )));
    }
    let mut dx = Array3::zeros((rows / 2, cols / 2, ch));
    for s in 0..h / 2 {
        for t in 0..w / 2 {
            for p in 0..angular {
                for q in 0..angular {
                    for k in 0..ch {
                        let mut acc = E::zero();
                        for i in 0..2 {
                            for j in 0..2 {
                                acc = acc
                                    + dy[[(2 * s + i) * angular + p, (2 * t + j) * angular + q, k]];
                            }
                        }
                        dx[[s * angular + p, t * angular + q, k]] = acc;
                    }
                }
            }
        }
    }
    Ok(dx)
}
