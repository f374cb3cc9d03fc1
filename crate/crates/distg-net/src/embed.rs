use ndarray::Array1;

use crate::element::Element;
use crate::error::NetError;
use crate::Result;

/// Sinusoidal timestep embedding of even length `dim`: the first half holds
/// `sin(t * f_i)`, the second half `cos(t * f_i)`, with frequencies falling
/// geometrically from 1 to 1/10000.
///
/// `t = 0` therefore maps to `[0, ..., 0, 1, ..., 1]`.
pub fn timestep_embedding<E: Element>(t: usize, dim: usize) -> Result<Array1<E>> {
    if dim < 2 || dim % 2 != 0 {
        return Err(NetError::InvalidConfig(format!(
            "embedding dim must be even and >= 2, got {dim}"
        )));
    }
    let half = dim / 2;
    let mut out = Array1::zeros(dim);
    for i in 0..half {
        let exponent = if half == 1 { 0.0 } else { i as f64 / (half - 1) as f64 };
        let freq = 10000f64.powf(-exponent);
        let arg = t as f64 * freq;
        out[i] = E::from_f64(arg.sin());
        out[half + i] = E::from_f64(arg.cos());
    }
    Ok(out)
}
