//! External depth-map ingestion: reads a raw `f32` map (with its JSON
//! sidecar) or a 16-bit grayscale PNG and min-max normalizes to `[0, 1]`.

use std::path::Path;

use ndarray::Array2;
use serde::Deserialize;

use crate::error::SceneError;
use crate::Result;

/// Shape sidecar expected next to a raw `.f32` depth map.
#[derive(Debug, Deserialize)]
struct DepthMeta {
    #[serde(rename = "H")]
    h: usize,
    #[serde(rename = "W")]
    w: usize,
}

/// Min-max normalization; constant maps collapse to 0.5 by convention, so
/// a flat depth estimate conditions as a mid-range plane rather than an
/// arbitrary extreme.
pub fn normalize_inverse_depth(raw: &Array2<f64>) -> Result<Array2<f64>> {
    if raw.is_empty() {
        return Err(SceneError::InvalidSpec("empty depth map".into()));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(SceneError::InvalidSpec("non-finite depth values".into()));
    }
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max - min < 1e-12 {
        return Ok(Array2::from_elem(raw.raw_dim(), 0.5));
    }
    Ok(raw.mapv(|v| (v - min) / (max - min)))
}

/// Loads a depth map from `path` and min-max normalizes it to `[0, 1]`.
///
/// Accepted formats: a raw little-endian `.f32` map with a `meta.json`
/// sidecar in the same directory (the light-field directory convention),
/// or an 8/16-bit grayscale PNG.
pub fn ingest_depth(path: &Path) -> Result<Array2<f64>> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let raw = match ext.as_str() {
        "f32" => {
            let meta_path = path
                .parent()
                .map(|d| d.join("meta.json"))
                .filter(|p| p.exists())
                .ok_or_else(|| SceneError::DepthFormat {
                    path: path.to_path_buf(),
                    reason: "missing meta.json sidecar for raw f32 map".into(),
                })?;
            let meta: DepthMeta = serde_json::from_slice(&std::fs::read(meta_path)?)?;
            lf_core::io::load_f32_map(path, meta.h, meta.w)?
        }
        "png" => {
            let img = image::open(path).map_err(|e| SceneError::DepthFormat {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
            let (w, h) = (img.width() as usize, img.height() as usize);
            let gray = img.into_luma16();
            let mut out = Array2::zeros((h, w));
            for (x, y, px) in gray.enumerate_pixels() {
                out[[y as usize, x as usize]] = px.0[0] as f64 / 65535.0;
            }
            out
        }
        other => {
            return Err(SceneError::DepthFormat {
                path: path.to_path_buf(),
                reason: format!("unsupported extension {other:?} (expected .f32 or .png)"),
            })
        }
    };
    normalize_inverse_depth(&raw)
}
