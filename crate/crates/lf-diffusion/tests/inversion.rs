//! Oracle-denoiser sampler tests: feeding the exact forward noise back into
//! the reverse process must invert the corruption. This is the load-bearing
//! correctness check for the forward/reverse algebra.

use lf_core::{build_condition, ConditionSignal, DisparityMap, Interp};
use lf_diffusion::{
    ddim_reverse, ddim_sample, ddpm_reverse, forward_sample, DiffusionState, Denoiser,
    DiffusionError, NoiseSchedule, SamplerConfig, SamplerKind,
};
use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

const U: usize = 3;
const V: usize = 3;
const H: usize = 4;
const W: usize = 4;

fn condition() -> ConditionSignal {
    let r = Array3::from_shape_fn((H, W, 1), |(i, j, _)| ((i * W + j) as f64) / 16.0);
    let d = DisparityMap::new(Array2::from_elem((H, W), 0.5)).unwrap();
    build_condition(&r, &d, U, V, 4, Interp::Bilinear).unwrap()
}

fn sai_pair(seed: u64) -> (Array3<f64>, Array3<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let x0 = Array3::from_shape_fn((U * H, V * W, 1), |_| rng.random_range(0.1..0.9));
    let eps = Array3::from_shape_fn((U * H, V * W, 1), |_| rng.sample(StandardNormal));
    (x0, eps)
}

/// Always answers with a fixed noise field.
struct OracleDenoiser(Array3<f64>);

impl Denoiser for OracleDenoiser {
    fn predict_noise(
        &self,
        _x: &Array3<f64>,
        _t: usize,
        _c: &ConditionSignal,
    ) -> lf_diffusion::Result<Array3<f64>> {
        Ok(self.0.clone())
    }
}

#[test]
fn single_ddim_step_inverts_the_forward_corruption() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let (x0, eps) = sai_pair(11);
    let x_t = forward_sample(&x0, 1000, &eps, &sched).unwrap();
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 1, eta: 0.0, seed: 0 };
    let state = DiffusionState::new(x_t, 1000, 0, &sched).unwrap();
    let got = ddim_reverse(&OracleDenoiser(eps), &c, &cfg, &sched, state).unwrap();
    let max_err = got
        .iter()
        .zip(x0.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_err < 1e-12, "max |err| = {max_err:e}");
}

#[test]
fn hundred_ddim_steps_invert_within_compound_roundoff() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let (x0, eps) = sai_pair(12);
    let x_t = forward_sample(&x0, 1000, &eps, &sched).unwrap();
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 100, eta: 0.0, seed: 0 };
    let state = DiffusionState::new(x_t, 1000, 0, &sched).unwrap();
    let got = ddim_reverse(&OracleDenoiser(eps), &c, &cfg, &sched, state).unwrap();
    let max_err = got
        .iter()
        .zip(x0.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_err < 1e-8, "max |err| = {max_err:e}");
}

#[test]
fn single_step_ddpm_inverts_at_the_boundary() {
    // From t = 1 the ancestral step with the true noise recovers x0
    // exactly: the coefficient algebra collapses because alpha_bar(1) =
    // alpha(1).
    let sched = NoiseSchedule::default();
    let c = condition();
    let (x0, eps) = sai_pair(13);
    let x_1 = forward_sample(&x0, 1, &eps, &sched).unwrap();
    let state = DiffusionState::new(x_1, 1, 0, &sched).unwrap();
    let got = ddpm_reverse(&OracleDenoiser(eps), &c, &sched, state).unwrap();
    let max_err = got
        .iter()
        .zip(x0.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_err < 1e-12, "max |err| = {max_err:e}");
}

#[test]
fn ddim_sampling_is_deterministic_and_leaves_the_condition_alone() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let before = c.clone();
    let (_, eps) = sai_pair(14);
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 10, eta: 0.0, seed: 99 };
    let den = OracleDenoiser(eps);
    let a = ddim_sample(&den, &c, &cfg, &sched, [U, V, H, W, 1]).unwrap();
    let b = ddim_sample(&den, &c, &cfg, &sched, [U, V, H, W, 1]).unwrap();
    assert_eq!(a.data(), b.data());
    assert_eq!(c, before);
    // A different seed draws different initial noise.
    let cfg2 = SamplerConfig { seed: 100, ..cfg };
    let d = ddim_sample(&den, &c, &cfg2, &sched, [U, V, H, W, 1]).unwrap();
    assert_ne!(a.data(), d.data());
}

#[test]
fn stochastic_ddim_is_still_seed_reproducible() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let (_, eps) = sai_pair(15);
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 10, eta: 0.7, seed: 4 };
    let den = OracleDenoiser(eps);
    let a = ddim_sample(&den, &c, &cfg, &sched, [U, V, H, W, 1]).unwrap();
    let b = ddim_sample(&den, &c, &cfg, &sched, [U, V, H, W, 1]).unwrap();
    assert_eq!(a.data(), b.data());
}

#[test]
fn samples_live_in_the_unit_interval() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let (_, eps) = sai_pair(16);
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 4, eta: 0.0, seed: 2 };
    let lf = ddim_sample(&OracleDenoiser(eps), &c, &cfg, &sched, [U, V, H, W, 1]).unwrap();
    assert!(lf.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
}

struct NanDenoiser;

impl Denoiser for NanDenoiser {
    fn predict_noise(
        &self,
        x: &Array3<f64>,
        _t: usize,
        _c: &ConditionSignal,
    ) -> lf_diffusion::Result<Array3<f64>> {
        Ok(Array3::from_elem(x.raw_dim(), f64::NAN))
    }
}

#[test]
fn non_finite_estimates_abort_with_a_diagnostic() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 10, eta: 0.0, seed: 0 };
    match ddim_sample(&NanDenoiser, &c, &cfg, &sched, [U, V, H, W, 1]) {
        Err(DiffusionError::NonFinite { t, .. }) => assert_eq!(t, 1000),
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn shape_disagreement_with_the_condition_is_rejected() {
    let sched = NoiseSchedule::default();
    let c = condition();
    let (_, eps) = sai_pair(17);
    let cfg = SamplerConfig { kind: SamplerKind::Ddim, steps: 10, eta: 0.0, seed: 0 };
    assert!(matches!(
        ddim_sample(&OracleDenoiser(eps), &c, &cfg, &sched, [U, V, H, W + 1, 1]),
        Err(DiffusionError::ShapeMismatch(_))
    ));
}
