//! The `export-sr` command: angular-preserving spatial downsampling of a
//! generated dataset into HR/LR training pairs.

use std::path::Path;

use lf_core::io::load_light_field;
use lf_scene::{export_sr_pairs, DatasetManifest, SrManifest, SrProvenance};

use crate::Result;

/// Build `factor`-x super-resolution pairs from every scene of the dataset
/// under `dataset_root` and write them (plus `sr_manifest.json`) into
/// `out_dir`.
pub fn cmd_export_sr(dataset_root: &Path, factor: usize, out_dir: &Path) -> Result<SrManifest> {
    let manifest = DatasetManifest::load(dataset_root)?;
    let mut lfs = Vec::new();
    let mut seeds = Vec::new();
    for entry in manifest.train.iter().chain(manifest.val.iter()) {
        let dir = dataset_root.join(DatasetManifest::scene_dir(&entry.id));
        lfs.push((entry.id.clone(), load_light_field(&dir)?.light_field));
        seeds.push(entry.seed);
    }
    let provenance = SrProvenance { disparity_range: manifest.disparity_range, seeds };
    Ok(export_sr_pairs(&lfs, factor, out_dir, provenance)?)
}
