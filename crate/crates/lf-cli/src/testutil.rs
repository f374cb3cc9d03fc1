//! Shared fixtures for unit tests.

use crate::config::RunConfig;

/// A configuration small enough for smoke tests: 3x3 views, 8x8 pixels,
/// one colour channel, and an 8-channel two-scale net.
pub fn smoke_cfg() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.data.scenes = 4;
    cfg.data.val_scenes = 1;
    cfg.data.u = 3;
    cfg.data.v = 3;
    cfg.data.h = 8;
    cfg.data.w = 8;
    cfg.data.channels = 1;
    cfg.data.patch = 8;
    cfg.data.patch_stride = 8;
    cfg.model.net.angular = 3;
    cfg.model.net.base_channels = 8;
    cfg.model.net.scales = 2;
    cfg.model.net.blocks_per_scale = 1;
    cfg.model.net.time_embed_dim = 16;
    cfg.model.net.in_channels = 10;
    cfg.model.net.out_channels = 1;
    cfg.model.pe_dim = 8;
    cfg.train.steps = 2;
    cfg.train.batch = 2;
    cfg.train.ckpt_every = 2;
    cfg.sample.steps = 10;
    cfg
}
