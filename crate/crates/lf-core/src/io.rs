//! On-disk light-field directories.
//!
//! A directory holds one PNG per view named `view_{p}_{q}.png` (8- or
//! 16-bit), a `meta.json` sidecar describing the shapes, and optionally a
//! `disparity.f32` file: raw little-endian `f32` values, row-major, `H`
//! rows of `W`. All writes go through a temp-file-then-rename so readers
//! never observe partial files.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use image::{DynamicImage, ImageEncoder};
use ndarray::{Array2, Array5};
use serde::{Deserialize, Serialize};

use crate::disparity::DisparityMap;
use crate::error::LfError;
use crate::lightfield::LightField;
use crate::Result;

/// Sample precision of the view PNGs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u8 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    fn from_bits(bits: u8) -> Result<Self> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(LfError::MetaMismatch(format!("unsupported bit depth {other}"))),
        }
    }
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfMeta {
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub channels: usize,
    #[serde(default)]
    pub disparity_range: Option<[f64; 2]>,
    pub bit_depth: u8,
}

/// A light field read back from disk together with its sidecar data.
#[derive(Debug, Clone)]
pub struct LoadedLightField {
    pub light_field: LightField,
    pub meta: LfMeta,
    pub disparity: Option<DisparityMap>,
}

/// Write `bytes` to `path` atomically (temp file in the same directory,
/// then rename over the target).
pub fn write_bytes_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn view_name(p: usize, q: usize) -> String {
    format!("view_{p}_{q}.png")
}

fn encode_view_png(view: &ndarray::ArrayView3<'_, f64>, depth: BitDepth) -> Result<Vec<u8>> {
    let (h, w, c) = view.dim();
    let color = match (c, depth) {
        (1, BitDepth::Eight) => image::ExtendedColorType::L8,
        (3, BitDepth::Eight) => image::ExtendedColorType::Rgb8,
        (1, BitDepth::Sixteen) => image::ExtendedColorType::L16,
        (3, BitDepth::Sixteen) => image::ExtendedColorType::Rgb16,
        _ => return Err(LfError::InvalidShape(format!("cannot encode {c}-channel view"))),
    };
    let mut raw = Vec::with_capacity(h * w * c * 2);
    match depth {
        BitDepth::Eight => {
            for &x in view.iter() {
                raw.push((x * 255.0).round() as u8);
            }
        }
        BitDepth::Sixteen => {
            // The PNG encoder takes 16-bit samples in native byte order and
            // handles the big-endian conversion itself.
            for &x in view.iter() {
                let q = (x * 65535.0).round() as u16;
                raw.extend_from_slice(&q.to_ne_bytes());
            }
        }
    }
    let mut png = Vec::new();
    image::codecs::png::PngEncoder::new(&mut png).write_image(&raw, w as u32, h as u32, color)?;
    Ok(png)
}

fn decode_view_png(path: &Path, meta: &LfMeta) -> Result<ndarray::Array3<f64>> {
    if !path.exists() {
        return Err(LfError::MissingFile(path.to_path_buf()));
    }
    let img = image::open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if (h, w) != (meta.h, meta.w) {
        return Err(LfError::MetaMismatch(format!(
            "{} is {h}x{w}, expected {}x{}",
            path.display(),
            meta.h,
            meta.w
        )));
    }
    let mut out = ndarray::Array3::zeros((h, w, meta.channels));
    let depth = BitDepth::from_bits(meta.bit_depth)?;
    match (img, meta.channels, depth) {
        (DynamicImage::ImageLuma8(buf), 1, BitDepth::Eight) => {
            for (i, x) in out.iter_mut().enumerate() {
                *x = buf.as_raw()[i] as f64 / 255.0;
            }
        }
        (DynamicImage::ImageRgb8(buf), 3, BitDepth::Eight) => {
            for (i, x) in out.iter_mut().enumerate() {
                *x = buf.as_raw()[i] as f64 / 255.0;
            }
        }
        (DynamicImage::ImageLuma16(buf), 1, BitDepth::Sixteen) => {
            for (i, x) in out.iter_mut().enumerate() {
                *x = buf.as_raw()[i] as f64 / 65535.0;
            }
        }
        (DynamicImage::ImageRgb16(buf), 3, BitDepth::Sixteen) => {
            for (i, x) in out.iter_mut().enumerate() {
                *x = buf.as_raw()[i] as f64 / 65535.0;
            }
        }
        (img, c, d) => {
            return Err(LfError::MetaMismatch(format!(
                "{} decodes as {:?}, expected {c} channels at {} bits",
                path.display(),
                img.color(),
                d.bits()
            )))
        }
    }
    Ok(out)
}

/// Save a light field (and optional disparity sidecar) into `dir`, creating
/// it if needed.
pub fn save_light_field(
    dir: &Path,
    lf: &LightField,
    depth: BitDepth,
    disparity: Option<&DisparityMap>,
    disparity_range: Option<[f64; 2]>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = LfMeta {
        u: lf.u(),
        v: lf.v(),
        h: lf.height(),
        w: lf.width(),
        channels: lf.channels(),
        disparity_range,
        bit_depth: depth.bits(),
    };
    for p in 0..lf.u() {
        for q in 0..lf.v() {
            let png = encode_view_png(&lf.view(p, q)?, depth)?;
            write_bytes_atomic(&dir.join(view_name(p, q)), &png)?;
        }
    }
    if let Some(d) = disparity {
        if d.data().dim() != (lf.height(), lf.width()) {
            return Err(LfError::InvalidShape(format!(
                "disparity map {}x{} does not match {}x{} views",
                d.height(),
                d.width(),
                lf.height(),
                lf.width()
            )));
        }
        save_f32_map(&dir.join("disparity.f32"), d.data())?;
    }
    let mut json = serde_json::to_vec_pretty(&meta)?;
    json.push(b'\n');
    write_bytes_atomic(&dir.join("meta.json"), &json)?;
    Ok(())
}

/// Load a light-field directory written by [`save_light_field`].
pub fn load_light_field(dir: &Path) -> Result<LoadedLightField> {
    let meta_path = dir.join("meta.json");
    if !meta_path.exists() {
        return Err(LfError::MissingFile(meta_path));
    }
    let meta: LfMeta = serde_json::from_slice(&fs::read(&meta_path)?)?;
    BitDepth::from_bits(meta.bit_depth)?;
    let mut data = Array5::zeros((meta.u, meta.v, meta.h, meta.w, meta.channels));
    for p in 0..meta.u {
        for q in 0..meta.v {
            let view = decode_view_png(&dir.join(view_name(p, q)), &meta)?;
            data.slice_mut(ndarray::s![p, q, .., .., ..]).assign(&view);
        }
    }
    let disp_path = dir.join("disparity.f32");
    let disparity = if disp_path.exists() {
        Some(DisparityMap::new(load_f32_map(&disp_path, meta.h, meta.w)?)?)
    } else {
        None
    };
    Ok(LoadedLightField { light_field: LightField::new(data)?, meta, disparity })
}

/// Write a 2D map as raw little-endian `f32`, row-major.
pub fn save_f32_map(path: &Path, map: &Array2<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(map.len() * 4);
    for row in map.rows() {
        for &x in row {
            bytes.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    write_bytes_atomic(path, &bytes)
}

/// Read a raw little-endian `f32` map of known extent.
pub fn load_f32_map(path: &Path, h: usize, w: usize) -> Result<Array2<f64>> {
    if !path.exists() {
        return Err(LfError::MissingFile(path.to_path_buf()));
    }
    let bytes = fs::read(path)?;
    if bytes.len() != h * w * 4 {
        return Err(LfError::MetaMismatch(format!(
            "{} holds {} bytes, expected {} for a {h}x{w} f32 map",
            path.display(),
            bytes.len(),
            h * w * 4
        )));
    }
    let mut out = Array2::zeros((h, w));
    for (i, x) in out.iter_mut().enumerate() {
        let b = [bytes[4 * i], bytes[4 * i + 1], bytes[4 * i + 2], bytes[4 * i + 3]];
        *x = f32::from_le_bytes(b) as f64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array5;

    fn lattice_lf(u: usize, v: usize, h: usize, w: usize, c: usize, levels: f64) -> LightField {
        // Values on the quantization lattice so PNG round trips are exact.
        let mut a = Array5::zeros((u, v, h, w, c));
        for (i, x) in a.iter_mut().enumerate() {
            *x = ((i * 37) % (levels as usize + 1)) as f64 / levels;
        }
        LightField::new(a).unwrap()
    }

    #[test]
    fn eight_bit_round_trip_is_exact_on_the_lattice() {
        let dir = tempfile::tempdir().unwrap();
        let lf = lattice_lf(3, 3, 4, 5, 3, 255.0);
        save_light_field(dir.path(), &lf, BitDepth::Eight, None, None).unwrap();
        let back = load_light_field(dir.path()).unwrap();
        assert_eq!(back.light_field, lf);
        assert_eq!(back.meta.bit_depth, 8);
        assert!(back.disparity.is_none());
    }

    #[test]
    fn sixteen_bit_round_trip_is_exact_on_the_lattice() {
        let dir = tempfile::tempdir().unwrap();
        let lf = lattice_lf(1, 3, 2, 2, 1, 65535.0);
        save_light_field(dir.path(), &lf, BitDepth::Sixteen, None, None).unwrap();
        let back = load_light_field(dir.path()).unwrap();
        assert_eq!(back.light_field, lf);
    }

    #[test]
    fn quantization_rounds_to_nearest_level() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Array5::zeros((1, 1, 1, 2, 1));
        a[[0, 0, 0, 0, 0]] = 0.4999 / 255.0; // rounds down to 0
        a[[0, 0, 0, 1, 0]] = 0.5001 / 255.0; // rounds up to 1/255
        let lf = LightField::new(a).unwrap();
        save_light_field(dir.path(), &lf, BitDepth::Eight, None, None).unwrap();
        let back = load_light_field(dir.path()).unwrap();
        assert_eq!(back.light_field.data()[[0, 0, 0, 0, 0]], 0.0);
        assert_eq!(back.light_field.data()[[0, 0, 0, 1, 0]], 1.0 / 255.0);
    }

    #[test]
    fn disparity_sidecar_round_trips_at_f32_precision() {
        let dir = tempfile::tempdir().unwrap();
        let lf = lattice_lf(3, 3, 2, 3, 1, 255.0);
        let mut d = Array2::zeros((2, 3));
        for (i, x) in d.iter_mut().enumerate() {
            *x = (i as f64 - 2.5) * 0.731;
        }
        let dm = DisparityMap::new(d.clone()).unwrap();
        save_light_field(dir.path(), &lf, BitDepth::Eight, Some(&dm), Some([-2.0, 2.0])).unwrap();
        let back = load_light_field(dir.path()).unwrap();
        assert_eq!(back.meta.disparity_range, Some([-2.0, 2.0]));
        let got = back.disparity.unwrap();
        for (a, b) in got.data().iter().zip(d.iter()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn missing_view_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let lf = lattice_lf(3, 3, 2, 2, 1, 255.0);
        save_light_field(dir.path(), &lf, BitDepth::Eight, None, None).unwrap();
        fs::remove_file(dir.path().join("view_1_2.png")).unwrap();
        match load_light_field(dir.path()) {
            Err(LfError::MissingFile(p)) => {
                assert!(p.ends_with("view_1_2.png"));
            }
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn meta_shape_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let lf = lattice_lf(1, 1, 4, 4, 3, 255.0);
        save_light_field(dir.path(), &lf, BitDepth::Eight, None, None).unwrap();
        let meta_path = dir.path().join("meta.json");
        let mut meta: LfMeta = serde_json::from_slice(&fs::read(&meta_path).unwrap()).unwrap();
        meta.h = 5;
        fs::write(&meta_path, serde_json::to_vec(&meta).unwrap()).unwrap();
        assert!(matches!(load_light_field(dir.path()), Err(LfError::MetaMismatch(_))));
    }

    #[test]
    fn meta_json_uses_documented_key_names() {
        let dir = tempfile::tempdir().unwrap();
        let lf = lattice_lf(3, 1, 2, 2, 1, 255.0);
        save_light_field(dir.path(), &lf, BitDepth::Eight, None, None).unwrap();
        let text = fs::read_to_string(dir.path().join("meta.json")).unwrap();
        for key in ["\"U\"", "\"V\"", "\"H\"", "\"W\"", "\"channels\"", "\"bit_depth\""] {
            assert!(text.contains(key), "meta.json missing {key}");
        }
    }

    #[test]
    fn f32_map_helpers_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.f32");
        let m = Array2::from_shape_fn((3, 4), |(i, j)| (i as f64) * 0.5 - (j as f64) * 0.25);
        save_f32_map(&path, &m).unwrap();
        let back = load_f32_map(&path, 3, 4).unwrap();
        assert_eq!(back, m); // values chosen representable in f32
        assert!(load_f32_map(&path, 4, 4).is_err());
    }
}
