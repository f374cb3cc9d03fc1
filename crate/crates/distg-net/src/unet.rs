//! The multi-scale denoiser: stacked disentangle blocks arranged in a
//! U shape over the per-view spatial lattice, with the angular arrangement
//! preserved at every scale.

use ndarray::{concatenate, s, Array1, Array3, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::block::{spatial_spec, BlockCache, DistgBlock, NORM_GROUPS};
use crate::conv::{Conv2d, ConvCache, ConvSpec, Init};
use crate::element::Element;
use crate::embed::timestep_embedding;
use crate::error::NetError;
use crate::ops::{view_pool2, view_pool2_backward, view_up2, view_up2_backward};
use crate::Result;

/// Architecture hyperparameters.
///
/// `in_channels` counts the noisy image channels plus the condition
/// channels (image channels again, plus the positional-encoding depth), so
/// it always exceeds `2 * out_channels` by an even amount.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistgNetConfig {
    /// Angular extent A of the (A x A) view grid.
    pub angular: usize,
    /// Feature width used at every scale.
    pub base_channels: usize,
    /// Number of resolution levels; `scales - 1` poolings reach the
    /// bottleneck.
    pub scales: usize,
    /// Blocks per level: split between the encoder and decoder sides at
    /// outer levels, kept whole at the bottleneck.
    pub blocks_per_scale: usize,
    /// Length of the sinusoidal timestep embedding.
    pub time_embed_dim: usize,
    /// Input channels of the concatenated noisy + condition stack.
    pub in_channels: usize,
    /// Output channels (the noise estimate).
    pub out_channels: usize,
}

impl DistgNetConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(NetError::InvalidConfig(msg));
        if self.angular % 2 == 0 || self.angular == 0 {
            return fail(format!("angular extent must be odd, got {}", self.angular));
        }
        if self.scales == 0 {
            return fail("scales must be >= 1".into());
        }
        if self.blocks_per_scale == 0 {
            return fail("blocks_per_scale must be >= 1".into());
        }
        if self.base_channels == 0 || self.base_channels % NORM_GROUPS != 0 {
            return fail(format!(
                "base_channels must be a positive multiple of {NORM_GROUPS}, got {}",
                self.base_channels
            ));
        }
        if self.time_embed_dim < 2 || self.time_embed_dim % 2 != 0 {
            return fail(format!(
                "time_embed_dim must be even and >= 2, got {}",
                self.time_embed_dim
            ));
        }
        if self.out_channels == 0 {
            return fail("out_channels must be >= 1".into());
        }
        // in = 2 * out + encoding depth, with a positive even depth.
        if self.in_channels <= 2 * self.out_channels
            || (self.in_channels - 2 * self.out_channels) % 2 != 0
        {
            return fail(format!(
                "in_channels ({}) must be 2 * out_channels ({}) plus a positive even \
                 encoding depth",
                self.in_channels, self.out_channels
            ));
        }
        Ok(())
    }

    fn enc_blocks(&self) -> usize {
        self.blocks_per_scale.div_ceil(2)
    }

    fn dec_blocks(&self) -> usize {
        self.blocks_per_scale / 2
    }
}

/// The denoising network. Operates on macro-pixel arrays
/// `[A * H', A * W', in_channels]`; the per-view extent must be divisible
/// by `2^scales`.
#[derive(Debug, Clone)]
pub struct DistgUnet<E: Element> {
    config: DistgNetConfig,
    stem: Conv2d<E>,
    enc: Vec<Vec<DistgBlock<E>>>,
    mid: Vec<DistgBlock<E>>,
    skip_fuse: Vec<Conv2d<E>>,
    dec: Vec<Vec<DistgBlock<E>>>,
    head: Conv2d<E>,
}

/// Forward state for the backward pass.
pub struct UnetCache<E: Element> {
    stem: ConvCache<E>,
    enc: Vec<Vec<BlockCache<E>>>,
    mid: Vec<BlockCache<E>>,
    skip_fuse: Vec<ConvCache<E>>,
    dec: Vec<Vec<BlockCache<E>>>,
    head: ConvCache<E>,
}

impl<E: Element> DistgUnet<E> {
    /// Deterministically builds a network: the same `(config, seed)` always
    /// yields identical parameters.
    pub fn build_with_seed(config: DistgNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = config.angular;
        let f = config.base_channels;
        let te = config.time_embed_dim;
        let stem = Conv2d::new(spatial_spec(a, config.in_channels, f), Init::He, &mut rng);
        let outer = config.scales - 1;
        let mut enc = Vec::with_capacity(outer);
        for _ in 0..outer {
            let mut level = Vec::with_capacity(config.enc_blocks());
            for _ in 0..config.enc_blocks() {
                level.push(DistgBlock::new(a, f, te, &mut rng)?);
            }
            enc.push(level);
        }
        let mut mid = Vec::with_capacity(config.blocks_per_scale);
        for _ in 0..config.blocks_per_scale {
            mid.push(DistgBlock::new(a, f, te, &mut rng)?);
        }
        let mut skip_fuse = Vec::with_capacity(outer);
        let mut dec = Vec::with_capacity(outer);
        for _ in 0..outer {
            skip_fuse.push(Conv2d::new(ConvSpec::pointwise(2 * f, f), Init::He, &mut rng));
            let mut level = Vec::with_capacity(config.dec_blocks());
            for _ in 0..config.dec_blocks() {
                level.push(DistgBlock::new(a, f, te, &mut rng)?);
            }
            dec.push(level);
        }
        // Zero-initialized head: the untrained network outputs exactly zero,
        // which pins the initial training loss to the noise variance.
        let head = Conv2d::new(spatial_spec(a, f, config.out_channels), Init::Zero, &mut rng);
        Ok(Self { config, stem, enc, mid, skip_fuse, dec, head })
    }

    pub fn config(&self) -> &DistgNetConfig {
        &self.config
    }

    fn check_input(&self, x: &Array3<E>) -> Result<()> {
        let (rows, cols, ch) = x.dim();
        let a = self.config.angular;
        if ch != self.config.in_channels {
            return Err(NetError::ShapeMismatch(format!(
                "expected {} input channels, got {ch}",
                self.config.in_channels
            )));
        }
        if rows % a != 0 || cols % a != 0 {
            return Err(NetError::ShapeMismatch(format!(
                "macro-pixel grid {rows}x{cols} does not match angular extent {a}"
            )));
        }
        let (h, w) = (rows / a, cols / a);
        let div = 1usize << self.config.scales;
        if h % div != 0 || w % div != 0 {
            return Err(NetError::ShapeMismatch(format!(
                "spatial extent not divisible by 2^scales: per-view {h}x{w} vs 2^{}",
                self.config.scales
            )));
        }
        Ok(())
    }

    /// Noise estimate for a macro-pixel input at timestep `t`.
    pub fn forward(&self, x: &Array3<E>, t: usize) -> Result<Array3<E>> {
        Ok(self.forward_train(x, t)?.0)
    }

    /// Forward pass that retains every intermediate needed by backward.
    pub fn forward_train(&self, x: &Array3<E>, t: usize) -> Result<(Array3<E>, UnetCache<E>)> {
        self.check_input(x)?;
        let a = self.config.angular;
        let t_embed: Array1<E> = timestep_embedding(t, self.config.time_embed_dim)?;
        let (mut h, stem_cache) = self.stem.forward(x)?;
        let mut enc_caches = Vec::with_capacity(self.enc.len());
        let mut skips = Vec::with_capacity(self.enc.len());
        for level in &self.enc {
            let mut caches = Vec::with_capacity(level.len());
            for block in level {
                let (next, cache) = block.forward(&h, &t_embed)?;
                h = next;
                caches.push(cache);
            }
            enc_caches.push(caches);
            skips.push(h.clone());
            h = view_pool2(&h, a)?;
        }
        let mut mid_caches = Vec::with_capacity(self.mid.len());
        for block in &self.mid {
            let (next, cache) = block.forward(&h, &t_embed)?;
            h = next;
            mid_caches.push(cache);
        }
        let mut skip_caches: Vec<Option<ConvCache<E>>> =
            (0..self.enc.len()).map(|_| None).collect();
        let mut dec_caches: Vec<Vec<BlockCache<E>>> =
            (0..self.enc.len()).map(|_| Vec::new()).collect();
        for lvl in (0..self.enc.len()).rev() {
            h = view_up2(&h, a)?;
            let cat = concatenate(Axis(2), &[h.view(), skips[lvl].view()])
                .expect("skip and upsampled grids match");
            let (fused, cache) = self.skip_fuse[lvl].forward(&cat)?;
            h = fused;
            skip_caches[lvl] = Some(cache);
            for block in &self.dec[lvl] {
                let (next, cache) = block.forward(&h, &t_embed)?;
                h = next;
                dec_caches[lvl].push(cache);
            }
        }
        let (y, head_cache) = self.head.forward(&h)?;
        Ok((
            y,
            UnetCache {
                stem: stem_cache,
                enc: enc_caches,
                mid: mid_caches,
                skip_fuse: skip_caches.into_iter().map(|c| c.expect("filled")).collect(),
                dec: dec_caches,
                head: head_cache,
            },
        ))
    }

    /// Accumulate parameter gradients from an output gradient; returns the
    /// input gradient.
    pub fn backward(&mut self, cache: &UnetCache<E>, dy: &Array3<E>) -> Result<Array3<E>> {
        let a = self.config.angular;
        let f = self.config.base_channels;
        let mut dh = self.head.backward(&cache.head, dy);
        let mut dskips: Vec<Option<Array3<E>>> = (0..self.enc.len()).map(|_| None).collect();
        for lvl in 0..self.enc.len() {
            for (block, bc) in self.dec[lvl].iter_mut().zip(&cache.dec[lvl]).rev() {
                dh = block.backward(bc, &dh)?;
            }
            let dcat = self.skip_fuse[lvl].backward(&cache.skip_fuse[lvl], &dh);
            let dup = dcat.slice(s![.., .., 0..f]).to_owned();
            dskips[lvl] = Some(dcat.slice(s![.., .., f..2 * f]).to_owned());
            dh = view_up2_backward(&dup, a)?;
        }
        for (block, bc) in self.mid.iter_mut().zip(&cache.mid).rev() {
            dh = block.backward(bc, &dh)?;
        }
        for lvl in (0..self.enc.len()).rev() {
            dh = view_pool2_backward(&dh, a)?;
            dh = dh + dskips[lvl].take().expect("decoder visited every level");
            for (block, bc) in self.enc[lvl].iter_mut().zip(&cache.enc[lvl]).rev() {
                dh = block.backward(bc, &dh)?;
            }
        }
        Ok(self.stem.backward(&cache.stem, &dh))
    }

    /// Mean-squared error against `target`, with gradients accumulated into
    /// the parameters. `grad_scale` scales the seeded gradient (use the
    /// reciprocal batch size when accumulating over a batch).
    pub fn loss_and_backward(
        &mut self,
        x: &Array3<E>,
        t: usize,
        target: &Array3<E>,
        grad_scale: E,
    ) -> Result<f64> {
        let (y, cache) = self.forward_train(x, t)?;
        if y.dim() != target.dim() {
            return Err(NetError::ShapeMismatch(format!(
                "target shape {:?} does not match output {:?}",
                target.dim(),
                y.dim()
            )));
        }
        let n = E::from_f64(y.len() as f64);
        let diff = &y - target;
        let loss = diff.iter().map(|d| (*d * *d).to_f64()).sum::<f64>() / y.len() as f64;
        if !loss.is_finite() {
            return Err(NetError::NonFinite("training loss"));
        }
        let dy = diff.mapv(|d| d * E::from_f64(2.0) * grad_scale / n);
        self.backward(&cache, &dy)?;
        Ok(loss)
    }

    pub fn zero_grads(&mut self) {
        self.stem.zero_grads();
        for level in &mut self.enc {
            for block in level {
                block.zero_grads();
            }
        }
        for block in &mut self.mid {
            block.zero_grads();
        }
        for conv in &mut self.skip_fuse {
            conv.zero_grads();
        }
        for level in &mut self.dec {
            for block in level {
                block.zero_grads();
            }
        }
        self.head.zero_grads();
    }

    /// Total number of learnable scalars.
    pub fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit("", &mut |_, v| n += v.len());
        n
    }

    pub fn visit(&self, prefix: &str, f: &mut crate::param::ParamVisitor<'_, E>) {
        self.stem.visit(&crate::param::join(prefix, "stem"), f);
        for (lvl, level) in self.enc.iter().enumerate() {
            for (i, block) in level.iter().enumerate() {
                block.visit(&crate::param::join(prefix, &format!("enc{lvl}.b{i}")), f);
            }
        }
        for (i, block) in self.mid.iter().enumerate() {
            block.visit(&crate::param::join(prefix, &format!("mid.b{i}")), f);
        }
        for (lvl, conv) in self.skip_fuse.iter().enumerate() {
            conv.visit(&crate::param::join(prefix, &format!("skip{lvl}")), f);
        }
        for (lvl, level) in self.dec.iter().enumerate() {
            for (i, block) in level.iter().enumerate() {
                block.visit(&crate::param::join(prefix, &format!("dec{lvl}.b{i}")), f);
            }
        }
        self.head.visit(&crate::param::join(prefix, "head"), f);
    }

    pub fn visit_mut(&mut self, prefix: &str, f: &mut crate::param::ParamVisitorMut<'_, E>) {
        self.stem.visit_mut(&crate::param::join(prefix, "stem"), f);
        for (lvl, level) in self.enc.iter_mut().enumerate() {
            for (i, block) in level.iter_mut().enumerate() {
                block.visit_mut(&crate::param::join(prefix, &format!("enc{lvl}.b{i}")), f);
            }
        }
        for (i, block) in self.mid.iter_mut().enumerate() {
            block.visit_mut(&crate::param::join(prefix, &format!("mid.b{i}")), f);
        }
        for (lvl, conv) in self.skip_fuse.iter_mut().enumerate() {
            conv.visit_mut(&crate::param::join(prefix, &format!("skip{lvl}")), f);
        }
        for (lvl, level) in self.dec.iter_mut().enumerate() {
            for (i, block) in level.iter_mut().enumerate() {
                block.visit_mut(&crate::param::join(prefix, &format!("dec{lvl}.b{i}")), f);
            }
        }
        self.head.visit_mut(&crate::param::join(prefix, "head"), f);
    }

    pub fn visit_pairs_mut(&mut self, prefix: &str, f: &mut crate::param::PairVisitorMut<'_, E>) {
        self.stem.visit_pairs_mut(&crate::param::join(prefix, "stem"), f);
        for (lvl, level) in self.enc.iter_mut().enumerate() {
            for (i, block) in level.iter_mut().enumerate() {
                block.visit_pairs_mut(&crate::param::join(prefix, &format!("enc{lvl}.b{i}")), f);
            }
        }
        for (i, block) in self.mid.iter_mut().enumerate() {
            block.visit_pairs_mut(&crate::param::join(prefix, &format!("mid.b{i}")), f);
        }
        for (lvl, conv) in self.skip_fuse.iter_mut().enumerate() {
            conv.visit_pairs_mut(&crate::param::join(prefix, &format!("skip{lvl}")), f);
        }
        for (lvl, level) in self.dec.iter_mut().enumerate() {
            for (i, block) in level.iter_mut().enumerate() {
                block.visit_pairs_mut(&crate::param::join(prefix, &format!("dec{lvl}.b{i}")), f);
            }
        }
        self.head.visit_pairs_mut(&crate::param::join(prefix, "head"), f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn tiny_config() -> DistgNetConfig {
        DistgNetConfig {
            angular: 3,
            base_channels: 8,
            scales: 3,
            blocks_per_scale: 2,
            time_embed_dim: 16,
            in_channels: 8,
            out_channels: 3,
        }
    }

    fn random(rows: usize, cols: usize, ch: usize, seed: u64) -> Array3<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Array3::from_shape_fn((rows, cols, ch), |_| rng.sample(StandardNormal))
    }

    #[test]
    fn output_shape_matches_contract() {
        let net: DistgUnet<f64> = DistgUnet::build_with_seed(tiny_config(), 0).unwrap();
        let x = random(24, 24, 8, 1);
        let y = net.forward(&x, 37).unwrap();
        assert_eq!(y.dim(), (24, 24, 3));
    }

    #[test]
    fn fresh_network_outputs_zero() {
        let net: DistgUnet<f64> = DistgUnet::build_with_seed(tiny_config(), 1).unwrap();
        let x = random(24, 24, 8, 2);
        let y = net.forward(&x, 500).unwrap();
        let linf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(linf, 0.0);
    }

    #[test]
    fn forward_is_pure() {
        let net: DistgUnet<f32> = DistgUnet::build_with_seed(tiny_config(), 2).unwrap();
        let x = random(24, 24, 8, 3).mapv(|v| v as f32);
        let y1 = net.forward(&x, 10).unwrap();
        let y2 = net.forward(&x, 10).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn construction_is_deterministic() {
        let a: DistgUnet<f32> = DistgUnet::build_with_seed(tiny_config(), 9).unwrap();
        let b: DistgUnet<f32> = DistgUnet::build_with_seed(tiny_config(), 9).unwrap();
        let mut names = Vec::new();
        let mut mismatch = false;
        a.visit("", &mut |name, va| {
            names.push(name.to_string());
            b.visit("", &mut |n2, vb| {
                if n2 == name && va != vb {
                    mismatch = true;
                }
            });
        });
        assert!(!mismatch);
        assert!(names.contains(&"stem.weight".to_string()));
        assert!(names.contains(&"mid.b1.fuse.weight".to_string()));
        assert!(names.contains(&"head.bias".to_string()));
    }

    #[test]
    fn param_count_is_exact_and_stable() {
        let net: DistgUnet<f32> = DistgUnet::build_with_seed(tiny_config(), 3).unwrap();
        let mut total = 0usize;
        net.visit("", &mut |_, v| total += v.len());
        assert_eq!(net.param_count(), total);
        // Recomputed by hand from the layer shapes for the tiny config:
        // stem 584, six blocks of 2752 (A=3, F=8, Te=16), two skip fuses of
        // 136, head 219.
        assert_eq!(net.param_count(), 584 + 6 * 2752 + 2 * 136 + 219);
    }

    #[test]
    fn desk_scale_parameter_budget_holds() {
        let config = DistgNetConfig {
            angular: 5,
            base_channels: 16,
            scales: 3,
            blocks_per_scale: 2,
            time_embed_dim: 64,
            in_channels: 22,
            out_channels: 3,
        };
        let net: DistgUnet<f32> = DistgUnet::build_with_seed(config, 0).unwrap();
        assert!(net.param_count() <= 300_000, "params = {}", net.param_count());
    }

    #[test]
    fn indivisible_extents_are_rejected() {
        let net: DistgUnet<f64> = DistgUnet::build_with_seed(tiny_config(), 4).unwrap();
        // Per-view 4x4 is not divisible by 2^3.
        let err = net.forward(&random(12, 12, 8, 5), 1).unwrap_err();
        assert!(err.to_string().contains("2^scales"), "{err}");
        // Not a multiple of the angular extent at all.
        assert!(net.forward(&random(25, 25, 8, 6), 1).is_err());
        // Wrong channel count.
        assert!(net.forward(&random(24, 24, 7, 7), 1).is_err());
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut c = tiny_config();
        c.angular = 4;
        assert!(c.validate().is_err());
        let mut c = tiny_config();
        c.scales = 0;
        assert!(c.validate().is_err());
        let mut c = tiny_config();
        c.base_channels = 12;
        assert!(c.validate().is_err());
        let mut c = tiny_config();
        c.time_embed_dim = 15;
        assert!(c.validate().is_err());
        let mut c = tiny_config();
        c.in_channels = 6; // equals 2 * out: no room for the encoding depth
        assert!(c.validate().is_err());
        let mut c = tiny_config();
        c.in_channels = 9; // odd encoding depth
        assert!(c.validate().is_err());
        assert!(tiny_config().validate().is_ok());
    }

    #[test]
    fn training_step_reduces_loss_on_a_fixed_pair() {
        let mut net: DistgUnet<f64> = DistgUnet::build_with_seed(tiny_config(), 5).unwrap();
        let x = random(24, 24, 8, 6);
        let target = random(24, 24, 8, 7).slice(s![.., .., 0..3]).to_owned();
        net.zero_grads();
        let l0 = net.loss_and_backward(&x, 100, &target, 1.0).unwrap();
        // Plain gradient descent on all parameters.
        net.visit_pairs_mut("", &mut |_, mut v, g| {
            for (vi, gi) in v.iter_mut().zip(g.iter()) {
                *vi -= 0.5 * gi;
            }
        });
        net.zero_grads();
        let l1 = net.loss_and_backward(&x, 100, &target, 1.0).unwrap();
        assert!(l1 < l0, "{l1} !< {l0}");
    }
}
