//! Super-resolution pair export: per-view box downsampling plus a manifest
//! recording how the high-resolution light fields were produced.

use std::path::Path;

use ndarray::Array5;
use serde::{Deserialize, Serialize};

use lf_core::io::{save_light_field, write_bytes_atomic, BitDepth};
use lf_core::LightField;

use crate::error::SceneError;
use crate::Result;

/// Provenance recorded alongside exported pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrProvenance {
    pub disparity_range: [f64; 2],
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrPairEntry {
    pub id: String,
    pub lr: String,
    pub hr: String,
}

/// Contents of `sr_manifest.json` in the export directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrManifest {
    pub factor: usize,
    pub pairs: Vec<SrPairEntry>,
    pub provenance: SrProvenance,
}

/// Downsamples every view by averaging `factor x factor` blocks.
pub fn box_downsample(lf: &LightField, factor: usize) -> Result<LightField> {
    if factor != 2 && factor != 4 {
        return Err(SceneError::InvalidExport(format!(
            "downsampling factor must be 2 or 4, got {factor}"
        )));
    }
    let (u, v, h, w, c) = lf.data().dim();
    if h % factor != 0 || w % factor != 0 {
        return Err(SceneError::InvalidExport(format!(
            "spatial extent {h}x{w} is not divisible by factor {factor}"
        )));
    }
    let norm = (factor * factor) as f64;
    let mut out = Array5::zeros((u, v, h / factor, w / factor, c));
    for p in 0..u {
        for q in 0..v {
            for s in 0..h / factor {
                for t in 0..w / factor {
                    for ch in 0..c {
                        let mut acc = 0.0;
                        for i in 0..factor {
                            for j in 0..factor {
                                acc += lf.data()[[p, q, s * factor + i, t * factor + j, ch]];
                            }
                        }
                        out[[p, q, s, t, ch]] = acc / norm;
                    }
                }
            }
        }
    }
    Ok(LightField::new(out)?)
}

/// Writes `(low-res, high-res)` directory pairs under `out_dir` and returns
/// the manifest (also written to `out_dir/sr_manifest.json`).
pub fn export_sr_pairs(
    lfs: &[(String, LightField)],
    factor: usize,
    out_dir: &Path,
    provenance: SrProvenance,
) -> Result<SrManifest> {
    std::fs::create_dir_all(out_dir)?;
    let mut pairs = Vec::with_capacity(lfs.len());
    for (id, hr) in lfs {
        let lr = box_downsample(hr, factor)?;
        let hr_rel = format!("{id}/hr");
        let lr_rel = format!("{id}/lr");
        save_light_field(&out_dir.join(&hr_rel), hr, BitDepth::Sixteen, None, None)?;
        save_light_field(&out_dir.join(&lr_rel), &lr, BitDepth::Sixteen, None, None)?;
        pairs.push(SrPairEntry { id: id.clone(), lr: lr_rel, hr: hr_rel });
    }
    let manifest = SrManifest { factor, pairs, provenance };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_bytes_atomic(&out_dir.join("sr_manifest.json"), &json)?;
    Ok(manifest)
}
