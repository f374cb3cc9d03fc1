//! Procedural layer textures, rasterized once per layer onto the central
//! reference grid so every view resamples the same discrete image.

use ndarray::Array3;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::SceneError;
use crate::Result;

/// A procedural pattern plus the seed that pins its randomness.
/// `Grating` and `Checker` are fully parametric; `Blobs` draws its
/// geometry from the seeded stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextureSpec {
    /// Sinusoidal grating: mid-gray plus a sine along the given direction.
    Grating { period: f64, angle: f64, phase: f64 },
    /// Two-tone checkerboard with square cells of `cell` pixels.
    Checker { cell: usize, low: f64, high: f64 },
    /// Soft random blobs over a mid-gray background.
    Blobs { count: usize, seed: u64 },
}

impl TextureSpec {
    /// Seed contribution of the pattern itself (zero for parametric kinds).
    pub fn seed(&self) -> u64 {
        match self {
            TextureSpec::Blobs { seed, .. } => *seed,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TextureSpec::Grating { period, angle, phase } => {
                if !period.is_finite() || *period < 2.0 {
                    return Err(SceneError::InvalidSpec(format!(
                        "grating period must be finite and >= 2 pixels, got {period}"
                    )));
                }
                if !angle.is_finite() || !phase.is_finite() {
                    return Err(SceneError::InvalidSpec("non-finite grating parameters".into()));
                }
            }
            TextureSpec::Checker { cell, low, high } => {
                if *cell == 0 {
                    return Err(SceneError::InvalidSpec("checker cell must be >= 1".into()));
                }
                for v in [low, high] {
                    if !v.is_finite() || !(0.0..=1.0).contains(v) {
                        return Err(SceneError::InvalidSpec(format!(
                            "checker tones must lie in [0, 1], got {v}"
                        )));
                    }
                }
            }
            TextureSpec::Blobs { count, .. } => {
                if *count == 0 {
                    return Err(SceneError::InvalidSpec("blob count must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Renders the pattern to an `[h, w, channels]` image with values in
    /// `[0, 1]`. The RNG is consumed only by the `Blobs` kind.
    pub fn rasterize(
        &self,
        h: usize,
        w: usize,
        channels: usize,
        rng: &mut ChaCha12Rng,
    ) -> Array3<f64> {
        let mut img = Array3::zeros((h, w, channels));
        match *self {
            TextureSpec::Grating { period, angle, phase } => {
                let (dy, dx) = (angle.sin(), angle.cos());
                for s in 0..h {
                    for t in 0..w {
                        let proj = (s as f64 * dy + t as f64 * dx) / period;
                        for ch in 0..channels {
                            // A small per-channel phase offset keeps RGB
                            // textures from being purely gray.
                            let arg = std::f64::consts::TAU * (proj + phase) + ch as f64 * 0.7;
                            img[[s, t, ch]] = 0.5 + 0.45 * arg.sin();
                        }
                    }
                }
            }
            TextureSpec::Checker { cell, low, high } => {
                for s in 0..h {
                    for t in 0..w {
                        let parity = (s / cell + t / cell) % 2;
                        let base = if parity == 0 { low } else { high };
                        for ch in 0..channels {
                            // Slight per-channel tilt, clamped back to range.
                            img[[s, t, ch]] = (base + 0.04 * ch as f64).min(1.0);
                        }
                    }
                }
            }
            TextureSpec::Blobs { count, .. } => {
                img.fill(0.5);
                let min_side = h.min(w) as f64;
                for _ in 0..count {
                    let cy: f64 = rng.random_range(0.0..h as f64);
                    let cx: f64 = rng.random_range(0.0..w as f64);
                    let radius: f64 = rng.random_range(min_side / 10.0..min_side / 3.0);
                    let mut amp = [0.0; 8];
                    for a in amp.iter_mut().take(channels) {
                        *a = rng.random_range(-0.45..0.45);
                    }
                    for s in 0..h {
                        for t in 0..w {
                            let d2 = (s as f64 - cy).powi(2) + (t as f64 - cx).powi(2);
                            let fall = (-d2 / (2.0 * radius * radius)).exp();
                            for ch in 0..channels {
                                img[[s, t, ch]] += amp[ch] * fall;
                            }
                        }
                    }
                }
                img.mapv_inplace(|v| v.clamp(0.0, 1.0));
            }
        }
        img
    }
}
