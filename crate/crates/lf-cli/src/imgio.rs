//! Single-image PNG input and output for the CLI surface.

use std::path::Path;

use image::{DynamicImage, ImageEncoder};
use ndarray::Array3;

use crate::error::CliError;
use crate::Result;

/// Load an 8- or 16-bit PNG into a `[H, W, C]` array scaled to `[0, 1]`.
/// Grayscale maps to one channel, colour to three.
pub fn load_image(path: &Path) -> Result<Array3<f64>> {
    let img = image::open(path)
        .map_err(|e| CliError::Validation(format!("cannot read image {}: {e}", path.display())))?;
    let arr = match img {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 1), |(s, t, _)| {
                g.get_pixel(t as u32, s as u32).0[0] as f64 / 255.0
            })
        }
        DynamicImage::ImageLuma16(g) => {
            let (w, h) = g.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 1), |(s, t, _)| {
                g.get_pixel(t as u32, s as u32).0[0] as f64 / 65535.0
            })
        }
        other => {
            let rgb = other.to_rgb16();
            let (w, h) = rgb.dimensions();
            Array3::from_shape_fn((h as usize, w as usize, 3), |(s, t, ch)| {
                rgb.get_pixel(t as u32, s as u32).0[ch] as f64 / 65535.0
            })
        }
    };
    Ok(arr)
}

/// Write a `[H, W, C]` array in `[0, 1]` as a 16-bit PNG (grayscale for one
/// channel, RGB for three).
pub fn save_image(path: &Path, img: &Array3<f64>) -> Result<()> {
    let (h, w, c) = img.dim();
    if c != 1 && c != 3 {
        return Err(CliError::Validation(format!(
            "image channel count must be 1 or 3, got {c}"
        )));
    }
    let quant = |v: f64| -> u16 { (v.clamp(0.0, 1.0) * 65535.0).round() as u16 };
    let mut pixels = Vec::with_capacity(h * w * c);
    for s in 0..h {
        for t in 0..w {
            for ch in 0..c {
                pixels.push(quant(img[[s, t, ch]]));
            }
        }
    }
    // The encoder takes 16-bit samples in native byte order and performs the
    // big-endian conversion required by the format itself.
    let mut bytes = Vec::with_capacity(pixels.len() * 2);
    for v in pixels {
        bytes.extend_from_slice(&v.to_ne_bytes());
    }
    let color = if c == 1 {
        image::ExtendedColorType::L16
    } else {
        image::ExtendedColorType::Rgb16
    };
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(&bytes, w as u32, h as u32, color)
        .map_err(|e| CliError::Validation(format!("PNG encode failed: {e}")))?;
    lf_core::io::write_bytes_atomic(path, &out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_bit_round_trip_is_lossless_on_the_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = Array3::from_shape_fn((6, 5, 3), |(s, t, ch)| {
            ((s * 5 + t) * 3 + ch) as f64 * 400.0 / 65535.0
        });
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.dim(), (6, 5, 3));
        for (a, b) in img.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn grayscale_loads_as_one_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        let img = Array3::from_shape_fn((4, 4, 1), |(s, t, _)| (s + t) as f64 / 8.0);
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.dim(), (4, 4, 1));
    }

    #[test]
    fn bad_channel_counts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let img = Array3::zeros((4, 4, 2));
        assert!(save_image(&dir.path().join("x.png"), &img).is_err());
    }
}
