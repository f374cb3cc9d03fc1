//! Bridge between the diffusion layer (SAI mosaics, `f64`) and the
//! denoiser network (macro-pixel mosaics, `f32`).

use distg_net::DistgUnet;
use lf_core::{layout, ConditionSignal};
use lf_diffusion::{Denoiser, DiffusionError};
use ndarray::Array3;

/// Stack the noisy channels and the condition channels of one spatial
/// site: `[x | c]` along the channel axis, both in macro-pixel layout.
pub fn concat_channels(x: &Array3<f64>, c: &Array3<f64>) -> Array3<f64> {
    let (h, w, cx) = x.dim();
    let cc = c.dim().2;
    let mut out = Array3::zeros((h, w, cx + cc));
    out.slice_mut(ndarray::s![.., .., ..cx]).assign(x);
    out.slice_mut(ndarray::s![.., .., cx..]).assign(c);
    out
}

/// Assemble the network input for one sample: noisy macro-pixel mosaic
/// plus condition, converted to `f32`.
pub fn net_input(x_mp: &Array3<f64>, cond_mp: &Array3<f64>) -> Array3<f32> {
    concat_channels(x_mp, cond_mp).mapv(|v| v as f32)
}

/// A trained network exposed through the sampler-facing [`Denoiser`]
/// trait.  Layout reshuffling happens here: SAI in, SAI out.
pub struct NetDenoiser<'a> {
    net: &'a DistgUnet<f32>,
    u: usize,
    v: usize,
}

impl<'a> NetDenoiser<'a> {
    pub fn new(net: &'a DistgUnet<f32>, u: usize, v: usize) -> Self {
        Self { net, u, v }
    }
}

impl Denoiser for NetDenoiser<'_> {
    fn predict_noise(
        &self,
        x_t: &Array3<f64>,
        t: usize,
        c: &ConditionSignal,
    ) -> lf_diffusion::Result<Array3<f64>> {
        let five = layout::sai_to_five(x_t, self.u, self.v)?;
        let x_mp = layout::five_to_macropixel(&five);
        let input = net_input(&x_mp, &c.to_macropixel_array());
        let out = self
            .net
            .forward(&input, t)
            .map_err(|e| DiffusionError::Denoiser(e.to_string()))?;
        let out_five = layout::macropixel_to_five(&out.mapv(f64::from), self.u, self.v)?;
        Ok(layout::five_to_sai(&out_five))
    }
}
