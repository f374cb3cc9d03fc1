//! Dataset generation and loading.
//!
//! A dataset directory holds `dataset.json` plus one subdirectory per
//! scene under `scenes/`, each written by `lf_core::io::save_light_field`
//! with the ground-truth disparity sidecar.

use std::path::Path;

use lf_core::io::{load_light_field, save_light_field, BitDepth};
use lf_scene::{
    crop_patches, generate_scene, sample_scene_spec, DatasetManifest, SceneEntry, TrainingPatch,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::Result;

/// Counts reported after generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSummary {
    pub train_scenes: usize,
    pub val_scenes: usize,
    pub patches: usize,
}

/// Derive the seed of scene `index` from the master seed.  The golden-ratio
/// multiplier spreads consecutive indices across the seed space.
fn scene_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Patches per scene for the configured crop grid.
fn patches_per_scene(cfg: &RunConfig) -> usize {
    let steps = |extent: usize| (extent - cfg.data.patch) / cfg.data.patch_stride + 1;
    steps(cfg.data.h) * steps(cfg.data.w)
}

/// Generate the configured dataset under `out_dir` and write its manifest.
/// Fully deterministic in `(config, master seed)`.
pub fn cmd_gen_data(cfg: &RunConfig, out_dir: &Path) -> Result<GenSummary> {
    cfg.validate()?;
    let d = &cfg.data;
    let mut manifest = DatasetManifest {
        u: d.u,
        v: d.v,
        h: d.h,
        w: d.w,
        channels: d.channels,
        disparity_range: d.disparity_range,
        master_seed: d.seed,
        train: Vec::with_capacity(d.scenes),
        val: Vec::with_capacity(d.val_scenes),
    };
    let write_scene = |id: String, index: u64| -> Result<SceneEntry> {
        let seed = scene_seed(d.seed, index);
        let spec = sample_scene_spec(d.u, d.v, d.h, d.w, d.channels, d.disparity_range, seed);
        let (lf, _center, gt) = generate_scene(&spec, seed)?;
        save_light_field(
            &out_dir.join(DatasetManifest::scene_dir(&id)),
            &lf,
            BitDepth::Sixteen,
            Some(&gt),
            Some(d.disparity_range),
        )?;
        Ok(SceneEntry { id, seed })
    };
    for i in 0..d.scenes {
        let entry = write_scene(format!("scene-{i:04}"), i as u64)?;
        manifest.train.push(entry);
    }
    for j in 0..d.val_scenes {
        let entry = write_scene(format!("val-{j:04}"), (d.scenes + j) as u64)?;
        manifest.val.push(entry);
    }
    manifest.save(out_dir)?;
    Ok(GenSummary {
        train_scenes: d.scenes,
        val_scenes: d.val_scenes,
        patches: d.scenes * patches_per_scene(cfg),
    })
}

/// Load every training scene of a dataset and crop it into patches.
pub fn load_training_patches(cfg: &RunConfig, root: &Path) -> Result<Vec<TrainingPatch>> {
    let manifest = DatasetManifest::load(root)?;
    if (manifest.u, manifest.v) != (cfg.data.u, cfg.data.v)
        || manifest.channels != cfg.data.channels
    {
        return Err(CliError::Validation(format!(
            "dataset geometry {}x{} views, {} channels does not match the config",
            manifest.u, manifest.v, manifest.channels
        )));
    }
    let mut patches = Vec::new();
    for entry in &manifest.train {
        let dir = root.join(DatasetManifest::scene_dir(&entry.id));
        let loaded = load_light_field(&dir)?;
        let gt = loaded.disparity.ok_or_else(|| {
            CliError::Validation(format!("scene {} has no disparity sidecar", entry.id))
        })?;
        patches.extend(crop_patches(
            &loaded.light_field,
            &gt,
            cfg.data.patch,
            cfg.data.patch_stride,
            cfg.data.jitter,
            entry.seed,
        )?);
    }
    if patches.is_empty() {
        return Err(CliError::Validation("dataset yields no training patches".into()));
    }
    Ok(patches)
}
