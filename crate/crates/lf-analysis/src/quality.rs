//! PSNR and SSIM image-fidelity metrics.
//!
//! Both metrics operate on `[H, W, C]` arrays with values in an arbitrary
//! but consistent range.  PSNR takes the peak signal value explicitly; SSIM
//! fixes the dynamic range to 1 and uses the canonical 11x11 Gaussian
//! window with `k1 = 0.01`, `k2 = 0.03`.

use ndarray::{Array2, ArrayView3};

use crate::error::AnalysisError;
use crate::Result;

/// Side length of the SSIM window.
pub const SSIM_WINDOW: usize = 11;
/// Standard deviation of the SSIM Gaussian window.
pub const SSIM_SIGMA: f64 = 1.5;
/// Luminance stabilisation constant (`(k1 * L)^2` with `L = 1`).
pub const SSIM_C1: f64 = 0.01 * 0.01;
/// Contrast stabilisation constant (`(k2 * L)^2` with `L = 1`).
pub const SSIM_C2: f64 = 0.03 * 0.03;

fn check_shapes(a: &ArrayView3<f64>, b: &ArrayView3<f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(AnalysisError::ShapeMismatch {
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio in decibels, `10·log10(peak² / MSE)`.
///
/// Identical inputs have zero mean-squared error and return the
/// `f64::INFINITY` sentinel.
pub fn psnr(a: ArrayView3<f64>, b: ArrayView3<f64>, peak: f64) -> Result<f64> {
    check_shapes(&a, &b)?;
    if !(peak > 0.0) {
        return Err(AnalysisError::InvalidParam(format!(
            "peak must be positive, got {peak}"
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(AnalysisError::InvalidParam("empty image".into()));
    }
    let mut sum_sq = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let d = x - y;
        sum_sq += d * d;
    }
    let mse = sum_sq / n as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Normalised 1-D Gaussian tap weights for the SSIM window.
fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, tap) in g.iter_mut().enumerate() {
        let d = i as f64 - c;
        *tap = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        sum += *tap;
    }
    for tap in &mut g {
        *tap /= sum;
    }
    g
}

/// Separable Gaussian filter, valid mode: output is `(h-10, w-10)`.
fn gauss_valid(img: &Array2<f64>) -> Array2<f64> {
    let g = gaussian_taps();
    let (h, w) = img.dim();
    let (oh, ow) = (h - SSIM_WINDOW + 1, w - SSIM_WINDOW + 1);
    let mut rows = Array2::zeros((h, ow));
    for s in 0..h {
        for t in 0..ow {
            let mut acc = 0.0;
            for (i, &gi) in g.iter().enumerate() {
                acc += gi * img[[s, t + i]];
            }
            rows[[s, t]] = acc;
        }
    }
    let mut out = Array2::zeros((oh, ow));
    for s in 0..oh {
        for t in 0..ow {
            let mut acc = 0.0;
            for (j, &gj) in g.iter().enumerate() {
                acc += gj * rows[[s + j, t]];
            }
            out[[s, t]] = acc;
        }
    }
    out
}

/// Structural similarity index, averaged over all valid window positions
/// and channels.  Symmetric in its arguments; identical inputs score 1.
pub fn ssim(a: ArrayView3<f64>, b: ArrayView3<f64>) -> Result<f64> {
    check_shapes(&a, &b)?;
    let (h, w, c) = a.dim();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(AnalysisError::WindowTooLarge { h, w, window: SSIM_WINDOW });
    }
    let mut total = 0.0;
    for ch in 0..c {
        let pa = a.index_axis(ndarray::Axis(2), ch).to_owned();
        let pb = b.index_axis(ndarray::Axis(2), ch).to_owned();
        let mu_a = gauss_valid(&pa);
        let mu_b = gauss_valid(&pb);
        let m_aa = gauss_valid(&(&pa * &pa));
        let m_bb = gauss_valid(&(&pb * &pb));
        let m_ab = gauss_valid(&(&pa * &pb));
        let mut acc = 0.0;
        let (oh, ow) = mu_a.dim();
        for s in 0..oh {
            for t in 0..ow {
                let (ma, mb) = (mu_a[[s, t]], mu_b[[s, t]]);
                let va = m_aa[[s, t]] - ma * ma;
                let vb = m_bb[[s, t]] - mb * mb;
                let cov = m_ab[[s, t]] - ma * mb;
                let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
                let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
                acc += num / den;
            }
        }
        total += acc / (oh * ow) as f64;
    }
    Ok(total / c as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_image(h: usize, w: usize, c: usize, seed: u64) -> Array3<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Array3::from_shape_fn((h, w, c), |_| rng.random_range(0.0..1.0))
    }

    #[test]
    fn constant_offset_gives_twenty_db() {
        let a = Array3::from_elem((8, 8, 3), 0.3);
        let b = Array3::from_elem((8, 8, 3), 0.4);
        let value = psnr(a.view(), b.view(), 1.0).unwrap();
        assert!((value - 20.0).abs() < 1e-9, "got {value}");
    }

    #[test]
    fn identical_images_hit_the_sentinels() {
        let a = random_image(16, 16, 3, 0);
        assert!(psnr(a.view(), a.view(), 1.0).unwrap().is_infinite());
        let big = random_image(16, 16, 1, 1);
        assert!((ssim(big.view(), big.view()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_matches_a_loop_oracle() {
        let a = random_image(9, 7, 3, 2);
        let b = random_image(9, 7, 3, 3);
        let mut sum = 0.0;
        let mut n = 0usize;
        for s in 0..9 {
            for t in 0..7 {
                for ch in 0..3 {
                    let d = a[[s, t, ch]] - b[[s, t, ch]];
                    sum += d * d;
                    n += 1;
                }
            }
        }
        let oracle = 10.0 * (1.0 / (sum / n as f64)).log10();
        let value = psnr(a.view(), b.view(), 1.0).unwrap();
        assert!((value - oracle).abs() < 1e-12, "{value} vs {oracle}");
    }

    #[test]
    fn shape_and_peak_preconditions_are_enforced() {
        let a = random_image(8, 8, 1, 4);
        let b = random_image(8, 9, 1, 4);
        assert!(matches!(
            psnr(a.view(), b.view(), 1.0),
            Err(AnalysisError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            psnr(a.view(), a.view(), 0.0),
            Err(AnalysisError::InvalidParam(_))
        ));
        let tiny = random_image(8, 8, 1, 5);
        assert!(matches!(
            ssim(tiny.view(), tiny.view()),
            Err(AnalysisError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn luminance_shift_lands_strictly_inside_unit_interval() {
        let a = random_image(20, 20, 1, 6);
        let b = &a + 0.5;
        let value = ssim(a.view(), b.view()).unwrap();
        assert!(value > 0.0 && value < 1.0, "got {value}");
    }

    #[test]
    fn ssim_is_symmetric() {
        let a = random_image(24, 18, 3, 7);
        let b = random_image(24, 18, 3, 8);
        let ab = ssim(a.view(), b.view()).unwrap();
        let ba = ssim(b.view(), a.view()).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn ssim_matches_a_direct_window_oracle() {
        let a = random_image(32, 32, 1, 9);
        let b = random_image(32, 32, 1, 10);

        // Independent oracle: explicit 11x11 weighted sums per window.
        let taps = gaussian_taps();
        let mut kernel = [[0.0; SSIM_WINDOW]; SSIM_WINDOW];
        for (j, row) in kernel.iter_mut().enumerate() {
            for (i, w) in row.iter_mut().enumerate() {
                *w = taps[j] * taps[i];
            }
        }
        let mut acc = 0.0;
        let mut windows = 0usize;
        for s0 in 0..=32 - SSIM_WINDOW {
            for t0 in 0..=32 - SSIM_WINDOW {
                let (mut ma, mut mb) = (0.0, 0.0);
                let (mut maa, mut mbb, mut mab) = (0.0, 0.0, 0.0);
                for j in 0..SSIM_WINDOW {
                    for i in 0..SSIM_WINDOW {
                        let w = kernel[j][i];
                        let x = a[[s0 + j, t0 + i, 0]];
                        let y = b[[s0 + j, t0 + i, 0]];
                        ma += w * x;
                        mb += w * y;
                        maa += w * x * x;
                        mbb += w * y * y;
                        mab += w * x * y;
                    }
                }
                let (va, vb, cov) = (maa - ma * ma, mbb - mb * mb, mab - ma * mb);
                let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
                let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
                acc += num / den;
                windows += 1;
            }
        }
        let oracle = acc / windows as f64;
        let value = ssim(a.view(), b.view()).unwrap();
        assert!((value - oracle).abs() < 1e-10, "{value} vs {oracle}");
    }
}
