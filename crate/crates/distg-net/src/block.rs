//! The disentangle block: four subspace feature extractors over a
//! macro-pixel grid, fused and residual-added with timestep conditioning.

use ndarray::{concatenate, Array1, Array2, Array3, Axis, Ix1, Ix2, s};
use rand::Rng;

use crate::conv::{Conv2d, ConvCache, ConvSpec, Init};
use crate::element::Element;
use crate::error::NetError;
use crate::norm::{GroupNorm, GroupNormCache};
use crate::ops::{leaky_relu, leaky_relu_backward, upsample_nearest, upsample_nearest_backward};
use crate::param::{visit_one, visit_one_mut, visit_one_pair, Param};
use crate::Result;

/// Number of groups used by every normalization layer.
pub const NORM_GROUPS: usize = 8;

/// Spatial extractor: 3x3 kernel dilated by `a` so taps land on the same
/// view in every neighbouring macro-pixel; shape-preserving.
pub fn spatial_spec(a: usize, in_ch: usize, out_ch: usize) -> ConvSpec {
    ConvSpec {
        in_ch,
        out_ch,
        kernel: (3, 3),
        stride: (1, 1),
        pad: (a, a),
        dilation: (a, a),
    }
}

/// Angular extractor: an `a x a` kernel with stride `a` collapses each
/// macro-pixel to one site, mixing all views of one spatial location.
pub fn angular_spec(a: usize, in_ch: usize, out_ch: usize) -> ConvSpec {
    ConvSpec {
        in_ch,
        out_ch,
        kernel: (a, a),
        stride: (a, a),
        pad: (0, 0),
        dilation: (1, 1),
    }
}

/// Horizontal-EPI extractor: a `1 x a^2` kernel with stride `(1, a)` reads
/// one macro-pixel row segment, mixing one angular row with `a` horizontal
/// spatial neighbours.
pub fn epi_h_spec(a: usize, in_ch: usize, out_ch: usize) -> ConvSpec {
    ConvSpec {
        in_ch,
        out_ch,
        kernel: (1, a * a),
        stride: (1, a),
        pad: (0, a * (a - 1) / 2),
        dilation: (1, 1),
    }
}

/// Vertical-EPI extractor: the transpose of [`epi_h_spec`].
pub fn epi_v_spec(a: usize, in_ch: usize, out_ch: usize) -> ConvSpec {
    ConvSpec {
        in_ch,
        out_ch,
        kernel: (a * a, 1),
        stride: (a, 1),
        pad: (a * (a - 1) / 2, 0),
        dilation: (1, 1),
    }
}

/// Learned affine shift from the timestep embedding, one scalar per feature
/// channel. Zero-initialized so untrained blocks ignore the timestep.
#[derive(Debug, Clone)]
struct TimeShift<E: Element> {
    w: Param<E, Ix2>,
    b: Param<E, Ix1>,
}

impl<E: Element> TimeShift<E> {
    fn new(channels: usize, embed_dim: usize) -> Self {
        Self {
            w: Param::new(Array2::zeros((channels, embed_dim))),
            b: Param::new(Array1::zeros(channels)),
        }
    }

    fn forward(&self, t_embed: &Array1<E>) -> Array1<E> {
        self.w.value.dot(t_embed) + &self.b.value
    }

    fn backward(&mut self, t_embed: &Array1<E>, dshift: &Array1<E>) {
        for (k, &g) in dshift.iter().enumerate() {
            self.b.grad[k] = self.b.grad[k] + g;
            for (j, &e) in t_embed.iter().enumerate() {
                self.w.grad[[k, j]] = self.w.grad[[k, j]] + g * e;
            }
        }
    }
}

/// One disentangle block over `[a*h, a*w, channels]` macro-pixel features.
///
/// Forward: group-normalize, run the four extractors, concatenate along
/// channels, fuse with a 1x1 projection, add the timestep shift, apply the
/// leaky rectifier, and residual-add the input. The fusion projection and
/// timestep shift start at zero, so a freshly built block is the identity.
#[derive(Debug, Clone)]
pub struct DistgBlock<E: Element> {
    angular: usize,
    channels: usize,
    norm: GroupNorm<E>,
    spatial: Conv2d<E>,
    ang: Conv2d<E>,
    epi_h: Conv2d<E>,
    epi_v: Conv2d<E>,
    fuse: Conv2d<E>,
    time: TimeShift<E>,
}

/// Forward state for the backward pass.
pub struct BlockCache<E: Element> {
    norm: GroupNormCache<E>,
    spatial: ConvCache<E>,
    ang: ConvCache<E>,
    epi_h: ConvCache<E>,
    epi_v: ConvCache<E>,
    fuse: ConvCache<E>,
    pre_act: Array3<E>,
    t_embed: Array1<E>,
}

impl<E: Element> DistgBlock<E> {
    pub fn new<R: Rng>(
        angular: usize,
        channels: usize,
        time_embed_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if angular % 2 == 0 || angular == 0 {
            return Err(NetError::InvalidConfig(format!(
                "angular size must be odd, got {angular}"
            )));
        }
        Ok(Self {
            angular,
            channels,
            norm: GroupNorm::new(channels, NORM_GROUPS)?,
            spatial: Conv2d::new(spatial_spec(angular, channels, channels), Init::He, rng),
            ang: Conv2d::new(angular_spec(angular, channels, channels), Init::He, rng),
            epi_h: Conv2d::new(epi_h_spec(angular, channels, channels), Init::He, rng),
            epi_v: Conv2d::new(epi_v_spec(angular, channels, channels), Init::He, rng),
            fuse: Conv2d::new(ConvSpec::pointwise(4 * channels, channels), Init::Zero, rng),
            time: TimeShift::new(channels, time_embed_dim),
        })
    }

    pub fn forward(
        &self,
        x: &Array3<E>,
        t_embed: &Array1<E>,
    ) -> Result<(Array3<E>, BlockCache<E>)> {
        let (rows, cols, ch) = x.dim();
        let a = self.angular;
        if rows % a != 0 || cols % a != 0 || ch != self.channels {
            return Err(NetError::ShapeMismatch(format!(
                "block expects [k*{a}, k*{a}, {}], got [{rows}, {cols}, {ch}]",
                self.channels
            )));
        }
        let (n, norm_cache) = self.norm.forward(x)?;
        let (s_feat, s_cache) = self.spatial.forward(&n)?;
        let (a_low, a_cache) = self.ang.forward(&n)?;
        let a_feat = upsample_nearest(&a_low, a, a);
        let (h_low, h_cache) = self.epi_h.forward(&n)?;
        let h_feat = upsample_nearest(&h_low, 1, a);
        let (v_low, v_cache) = self.epi_v.forward(&n)?;
        let v_feat = upsample_nearest(&v_low, a, 1);
        let cat = concatenate(
            Axis(2),
            &[s_feat.view(), a_feat.view(), h_feat.view(), v_feat.view()],
        )
        .expect("extractor outputs share the lattice extent");
        let (fused, fuse_cache) = self.fuse.forward(&cat)?;
        let shift = self.time.forward(t_embed);
        let mut pre_act = fused;
        for k in 0..self.channels {
            let s = shift[k];
            pre_act.slice_mut(s![.., .., k]).mapv_inplace(|v| v + s);
        }
        let y = x + &leaky_relu(&pre_act);
        Ok((
            y,
            BlockCache {
                norm: norm_cache,
                spatial: s_cache,
                ang: a_cache,
                epi_h: h_cache,
                epi_v: v_cache,
                fuse: fuse_cache,
                pre_act,
                t_embed: t_embed.clone(),
            },
        ))
    }

    /// Accumulate parameter gradients and return the input gradient.
    pub fn backward(&mut self, cache: &BlockCache<E>, dy: &Array3<E>) -> Result<Array3<E>> {
        let a = self.angular;
        let f = self.channels;
        let dz = leaky_relu_backward(&cache.pre_act, dy);
        let mut dshift = Array1::zeros(f);
        for k in 0..f {
            dshift[k] = dz.slice(s![.., .., k]).sum();
        }
        self.time.backward(&cache.t_embed, &dshift);
        let dcat = self.fuse.backward(&cache.fuse, &dz);
        let ds = dcat.slice(s![.., .., 0..f]).to_owned();
        let da = dcat.slice(s![.., .., f..2 * f]).to_owned();
        let dh = dcat.slice(s![.., .., 2 * f..3 * f]).to_owned();
        let dv = dcat.slice(s![.., .., 3 * f..4 * f]).to_owned();
        let mut dn = self.spatial.backward(&cache.spatial, &ds);
        dn = dn + self.ang.backward(&cache.ang, &upsample_nearest_backward(&da, a, a)?);
        dn = dn + self.epi_h.backward(&cache.epi_h, &upsample_nearest_backward(&dh, 1, a)?);
        dn = dn + self.epi_v.backward(&cache.epi_v, &upsample_nearest_backward(&dv, a, 1)?);
        let dx_norm = self.norm.backward(&cache.norm, &dn);
        Ok(dy + &dx_norm)
    }

    pub fn zero_grads(&mut self) {
        self.norm.zero_grads();
        self.spatial.zero_grads();
        self.ang.zero_grads();
        self.epi_h.zero_grads();
        self.epi_v.zero_grads();
        self.fuse.zero_grads();
        self.time.w.zero_grad();
        self.time.b.zero_grad();
    }

    pub fn param_count(&self) -> usize {
        self.norm.param_count()
            + self.spatial.param_count()
            + self.ang.param_count()
            + self.epi_h.param_count()
            + self.epi_v.param_count()
            + self.fuse.param_count()
            + self.time.w.value.len()
            + self.time.b.value.len()
    }

    pub fn visit(&self, prefix: &str, f: &mut crate::param::ParamVisitor<'_, E>) {
        self.norm.visit(&crate::param::join(prefix, "norm"), f);
        self.spatial.visit(&crate::param::join(prefix, "spatial"), f);
        self.ang.visit(&crate::param::join(prefix, "angular"), f);
        self.epi_h.visit(&crate::param::join(prefix, "epi_h"), f);
        self.epi_v.visit(&crate::param::join(prefix, "epi_v"), f);
        self.fuse.visit(&crate::param::join(prefix, "fuse"), f);
        let time = crate::param::join(prefix, "time");
        visit_one!(&self.time.w, &time, "weight", f);
        visit_one!(&self.time.b, &time, "bias", f);
    }

    pub fn visit_mut(&mut self, prefix: &str, f: &mut crate::param::ParamVisitorMut<'_, E>) {
        self.norm.visit_mut(&crate::param::join(prefix, "norm"), f);
        self.spatial.visit_mut(&crate::param::join(prefix, "spatial"), f);
        self.ang.visit_mut(&crate::param::join(prefix, "angular"), f);
        self.epi_h.visit_mut(&crate::param::join(prefix, "epi_h"), f);
        self.epi_v.visit_mut(&crate::param::join(prefix, "epi_v"), f);
        self.fuse.visit_mut(&crate::param::join(prefix, "fuse"), f);
        let time = crate::param::join(prefix, "time");
        visit_one_mut!(&mut self.time.w, &time, "weight", f);
        visit_one_mut!(&mut self.time.b, &time, "bias", f);
    }

    pub fn visit_pairs_mut(&mut self, prefix: &str, f: &mut crate::param::PairVisitorMut<'_, E>) {
        self.norm.visit_pairs_mut(&crate::param::join(prefix, "norm"), f);
        self.spatial.visit_pairs_mut(&crate::param::join(prefix, "spatial"), f);
        self.ang.visit_pairs_mut(&crate::param::join(prefix, "angular"), f);
        self.epi_h.visit_pairs_mut(&crate::param::join(prefix, "epi_h"), f);
        self.epi_v.visit_pairs_mut(&crate::param::join(prefix, "epi_v"), f);
        self.fuse.visit_pairs_mut(&crate::param::join(prefix, "fuse"), f);
        let time = crate::param::join(prefix, "time");
        visit_one_pair!(&mut self.time.w, &time, "weight", f);
        visit_one_pair!(&mut self.time.b, &time, "bias", f);
    }
}
