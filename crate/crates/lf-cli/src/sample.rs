//! Light-field synthesis from a single image plus depth: the full
//! conditioning pipeline in front of the reverse-process sampler.

use std::path::Path;

use distg_net::{load_checkpoint, DistgUnet};
use lf_core::io::{save_light_field, BitDepth};
use lf_core::{
    build_condition, build_condition_center_only, rescale_inverse_depth, ConditionSignal,
    Interp, LightField,
};
use lf_diffusion::{
    ddim_sample, ddpm_sample, make_schedule, SampleSidecar, SamplerConfig, SamplerKind,
};
use lf_scene::ingest_depth;

use crate::adapter::NetDenoiser;
use crate::config::{DiffusionConfig, RunConfig};
use crate::error::CliError;
use crate::imgio::load_image;
use crate::Result;

/// Run the configured sampler over a prepared condition.
pub fn run_sampler(
    net: &DistgUnet<f32>,
    cond: &ConditionSignal,
    diff: &DiffusionConfig,
    scfg: &SamplerConfig,
    shape: [usize; 5],
) -> Result<LightField> {
    let sched = make_schedule(diff.t, diff.beta_1, diff.beta_t)?;
    scfg.validate(&sched)?;
    let denoiser = NetDenoiser::new(net, shape[0], shape[1]);
    let lf = match scfg.kind {
        SamplerKind::Ddim => ddim_sample(&denoiser, cond, scfg, &sched, shape)?,
        SamplerKind::Ddpm => ddpm_sample(&denoiser, cond, &sched, shape, scfg.seed)?,
    };
    Ok(lf)
}

/// Synthesise a light field from `image_path` (+ `depth_path` unless
/// `center_only`) and write it, its conditioning disparity, and a
/// provenance sidecar into `out_dir`.
pub fn cmd_sample(
    cfg: &RunConfig,
    ckpt: &Path,
    image_path: &Path,
    depth_path: Option<&Path>,
    center_only: bool,
    out_dir: &Path,
) -> Result<LightField> {
    cfg.validate()?;
    let net: DistgUnet<f32> = load_checkpoint(ckpt)?;
    if *net.config() != cfg.model.net {
        return Err(CliError::Validation(format!(
            "checkpoint architecture {:?} does not match the configured model {:?}",
            net.config(),
            cfg.model.net
        )));
    }
    let center = load_image(image_path)?;
    let (h, w, c) = center.dim();
    if c != cfg.data.channels {
        return Err(CliError::Validation(format!(
            "input image has {c} channels, config expects {}",
            cfg.data.channels
        )));
    }
    let (u, v) = (cfg.data.u, cfg.data.v);
    let range = cfg.sample.disparity_range;

    let (cond, disparity) = if center_only {
        (build_condition_center_only(&center, u, v, cfg.model.pe_dim)?, None)
    } else {
        let depth_path = depth_path.ok_or_else(|| {
            CliError::Validation("a depth map is required unless --center-only is set".into())
        })?;
        let z = ingest_depth(depth_path)?;
        if z.dim() != (h, w) {
            return Err(CliError::Validation(format!(
                "depth map {}x{} does not match the {h}x{w} image",
                z.dim().0,
                z.dim().1
            )));
        }
        let disparity = rescale_inverse_depth(&z, range[0], range[1])?;
        let cond = build_condition(&center, &disparity, u, v, cfg.model.pe_dim, Interp::Bilinear)?;
        (cond, Some(disparity))
    };

    let scfg = SamplerConfig {
        kind: cfg.sample.sampler,
        steps: cfg.sample.steps,
        eta: cfg.sample.eta,
        seed: cfg.sample.seed,
    };
    let lf = run_sampler(&net, &cond, &cfg.diffusion, &scfg, [u, v, h, w, c])?;

    save_light_field(out_dir, &lf, BitDepth::Sixteen, disparity.as_ref(), Some(range))?;
    let sched = make_schedule(cfg.diffusion.t, cfg.diffusion.beta_1, cfg.diffusion.beta_t)?;
    let sidecar = SampleSidecar::new(&scfg, &sched, Some(range))?;
    let mut json = serde_json::to_vec_pretty(&sidecar)?;
    json.push(b'\n');
    lf_core::io::write_bytes_atomic(&out_dir.join("sample.json"), &json)?;
    Ok(lf)
}
