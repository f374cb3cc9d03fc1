//! Property tests for the layout, warp, and condition invariants.

use lf_core::{extract_epi, layout, warp_central_view, DisparityMap, EpiAxis, Interp};
use ndarray::{Array2, Array3, Array5};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_five(u: usize, v: usize, h: usize, w: usize, c: usize, seed: u64) -> Array5<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Array5::from_shape_fn((u, v, h, w, c), |_| rng.random::<f64>())
}

fn random_image(h: usize, w: usize, c: usize, seed: u64) -> Array3<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Array3::from_shape_fn((h, w, c), |_| rng.random::<f64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reshape_round_trips_are_bit_exact(
        u in 1usize..5,
        v in 1usize..5,
        h in 1usize..7,
        w in 1usize..7,
        c in prop::sample::select(vec![1usize, 3]),
        seed in any::<u64>(),
    ) {
        let a = random_five(u, v, h, w, c, seed);
        let mp = layout::five_to_macropixel(&a);
        prop_assert_eq!(&layout::macropixel_to_five(&mp, u, v).unwrap(), &a);
        let sai = layout::five_to_sai(&a);
        prop_assert_eq!(&layout::sai_to_five(&sai, u, v).unwrap(), &a);
        prop_assert_eq!(&layout::macropixel_to_sai_array(&mp, u, v).unwrap(), &sai);
        prop_assert_eq!(&layout::sai_to_macropixel_array(&sai, u, v).unwrap(), &mp);
    }

    #[test]
    fn zero_disparity_warp_is_identity(
        u in prop::sample::select(vec![1usize, 3, 5]),
        v in prop::sample::select(vec![1usize, 3, 5]),
        h in 2usize..8,
        w in 2usize..8,
        seed in any::<u64>(),
    ) {
        let r = random_image(h, w, 1, seed);
        let d = DisparityMap::new(Array2::zeros((h, w))).unwrap();
        for interp in [Interp::Bilinear, Interp::Nearest] {
            let lf = warp_central_view(&r, &d, u, v, interp).unwrap();
            for p in 0..u {
                for q in 0..v {
                    prop_assert_eq!(lf.view(p, q).unwrap(), r.view());
                }
            }
        }
    }

    #[test]
    fn central_view_of_warp_is_bit_exact(
        h in 2usize..8,
        w in 2usize..8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let r = random_image(h, w, 3, rng.random());
        let d = DisparityMap::new(
            Array2::from_shape_fn((h, w), |_| rng.random_range(-3.0..3.0)),
        ).unwrap();
        let lf = warp_central_view(&r, &d, 5, 3, Interp::Bilinear).unwrap();
        prop_assert_eq!(lf.view(2, 1).unwrap(), r.view());
    }

    #[test]
    fn integer_disparity_warp_matches_translation_oracle(
        h in 3usize..9,
        w in 3usize..9,
        d0 in -2i64..=2,
        seed in any::<u64>(),
    ) {
        let r = random_image(h, w, 1, seed);
        let d = DisparityMap::new(Array2::from_elem((h, w), d0 as f64)).unwrap();
        for interp in [Interp::Nearest, Interp::Bilinear] {
            let lf = warp_central_view(&r, &d, 3, 3, interp).unwrap();
            for p in 0..3usize {
                for q in 0..3usize {
                    let dp = 1 - p as i64;
                    let dq = 1 - q as i64;
                    let view = lf.view(p, q).unwrap();
                    for s in 0..h {
                        for t in 0..w {
                            let ss = (s as i64 + dp * d0).clamp(0, h as i64 - 1) as usize;
                            let tt = (t as i64 + dq * d0).clamp(0, w as i64 - 1) as usize;
                            prop_assert_eq!(view[[s, t, 0]], r[[ss, tt, 0]]);
                        }
                    }
                }
            }
        }
    }
}

/// A fronto-parallel scene warped to constant disparity `d0` must produce
/// EPI lines of slope `d0` pixels per view.
#[test]
fn epi_lines_have_the_scene_disparity_as_slope() {
    let (h, w) = (21, 33);
    let d0 = 0.7;
    // Single bright Gaussian blob on a dark background.
    let (cy, cx) = (10.0, 16.0);
    let r = Array3::from_shape_fn((h, w, 1), |(i, j, _)| {
        let dy = (i as f64 - cy) / 2.0;
        let dx = (j as f64 - cx) / 2.0;
        (-0.5 * (dy * dy + dx * dx)).exp()
    });
    let d = DisparityMap::new(Array2::from_elem((h, w), d0)).unwrap();
    let lf = warp_central_view(&r, &d, 5, 5, Interp::Bilinear).unwrap();
    let epi = extract_epi(&lf, EpiAxis::Horizontal, 2, 10).unwrap();

    // Intensity centroid along t for each view row q; the centroid moves by
    // d0 pixels per unit q.
    let mut xs = Vec::new();
    for q in 0..5 {
        let (mut mass, mut moment) = (0.0, 0.0);
        for t in 0..w {
            mass += epi[[q, t, 0]];
            moment += t as f64 * epi[[q, t, 0]];
        }
        xs.push(moment / mass);
    }
    let qm = 2.0;
    let xm = xs.iter().sum::<f64>() / 5.0;
    let (mut num, mut den) = (0.0, 0.0);
    for (q, &x) in xs.iter().enumerate() {
        num += (q as f64 - qm) * (x - xm);
        den += (q as f64 - qm).powi(2);
    }
    let slope = num / den;
    assert!(
        (slope - d0).abs() < 0.1,
        "fitted slope {slope} should be within 0.1 of {d0}"
    );
}

/// Warped views of a LightField stay in range and form a valid field even
/// when every sample lands outside the source image.
#[test]
fn extreme_disparities_stay_clamped_and_valid() {
    let r = random_image(4, 4, 3, 7);
    let d = DisparityMap::new(Array2::from_elem((4, 4), 100.0)).unwrap();
    let lf = warp_central_view(&r, &d, 3, 3, Interp::Bilinear).unwrap();
    assert_eq!(lf.view(1, 1).unwrap(), r.view());
    // Corner view samples far off the grid; everything clamps to the last
    // row/column of r.
    let v = lf.view(0, 0).unwrap();
    assert_eq!(v[[0, 0, 0]], r[[3, 3, 0]]);
}
