use lf_core::{ConditionSignal, LightField, SaiGridImage};
use ndarray::{Array, Array3, Dimension};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::denoiser::Denoiser;
use crate::error::DiffusionError;
use crate::schedule::NoiseSchedule;
use crate::Result;

/// Which reverse-process sampler to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Ddpm,
    Ddim,
}

/// Sampler settings. `steps` must divide `T` evenly for DDIM (the kept
/// timesteps are a uniform stride ending at `T`); DDPM always runs all `T`
/// steps. `eta` scales the DDIM per-step noise (0 = deterministic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub steps: usize,
    pub eta: f64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn validate(&self, sched: &NoiseSchedule) -> Result<()> {
        let t_max = sched.t_max();
        if self.steps < 1 || self.steps > t_max {
            return Err(DiffusionError::InvalidSamplerConfig(format!(
                "steps must lie in [1, {t_max}], got {}",
                self.steps
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) || !self.eta.is_finite() {
            return Err(DiffusionError::InvalidSamplerConfig(format!(
                "eta must lie in [0, 1], got {}",
                self.eta
            )));
        }
        if self.kind == SamplerKind::Ddim && t_max % self.steps != 0 {
            return Err(DiffusionError::InvalidSamplerConfig(format!(
                "steps ({}) must divide T ({t_max}) for a uniform DDIM stride",
                self.steps
            )));
        }
        Ok(())
    }
}

/// Provenance sidecar written beside every generated light field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub seed: u64,
    pub sampler: SamplerKind,
    pub steps: usize,
    pub eta: f64,
    #[serde(rename = "T")]
    pub t_max: usize,
    pub beta_1: f64,
    #[serde(rename = "beta_T")]
    pub beta_t_max: f64,
    #[serde(default)]
    pub disparity_range: Option<[f64; 2]>,
}

impl SampleSidecar {
    pub fn new(
        cfg: &SamplerConfig,
        sched: &NoiseSchedule,
        disparity_range: Option<[f64; 2]>,
    ) -> Result<Self> {
        Ok(Self {
            seed: cfg.seed,
            sampler: cfg.kind,
            steps: cfg.steps,
            eta: cfg.eta,
            t_max: sched.t_max(),
            beta_1: sched.beta(1)?,
            beta_t_max: sched.beta(sched.t_max())?,
            disparity_range,
        })
    }
}

/// A point on a sampling trajectory: the noisy SAI-layout array at timestep
/// `t`, plus the seed all stochastic draws derive from.
#[derive(Debug, Clone)]
pub struct DiffusionState {
    pub x_t: Array3<f64>,
    pub t: usize,
    pub rng_seed: u64,
}

impl DiffusionState {
    pub fn new(x_t: Array3<f64>, t: usize, rng_seed: u64, sched: &NoiseSchedule) -> Result<Self> {
        if t > sched.t_max() {
            return Err(DiffusionError::InvalidTimestep { t, lo: 0, t_max: sched.t_max() });
        }
        if !x_t.iter().all(|x| x.is_finite()) {
            return Err(DiffusionError::NonFinite { what: "diffusion state", t });
        }
        Ok(Self { x_t, t, rng_seed })
    }

    /// Draw `x_T ~ N(0, I)` for a fresh trajectory.
    pub fn draw_initial(
        shape: (usize, usize, usize),
        sched: &NoiseSchedule,
        seed: u64,
    ) -> Self {
        Self {
            x_t: gaussian_field(shape, seed, 0),
            t: sched.t_max(),
            rng_seed: seed,
        }
    }
}

/// Standard-normal array derived from `(seed, stream)` only. Stream 0 is
/// the initial noise; stream `t` supplies the injected noise of step `t`,
/// making every draw reproducible independent of trajectory history.
fn gaussian_field(shape: (usize, usize, usize), seed: u64, stream: u64) -> Array3<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Array3::from_shape_fn(shape, |_| rng.sample(StandardNormal))
}

/// One ancestral reverse step: from `x_{t+1}` and the noise estimate, form
///
/// `x_t = (x_{t+1} - ((1 - alpha(t+1)) / sqrt(1 - alpha_bar(t+1))) * n_est)
///        / sqrt(alpha(t+1)) + sigma(t+1) * z`
///
/// `t` is the destination timestep; `z` must be absent exactly when `t = 0`.
pub fn ddpm_step<D: Dimension>(
    x_next: &Array<f64, D>,
    n_est: &Array<f64, D>,
    t: usize,
    sched: &NoiseSchedule,
    z: Option<&Array<f64, D>>,
) -> Result<Array<f64, D>> {
    if t + 1 > sched.t_max() {
        return Err(DiffusionError::InvalidTimestep { t, lo: 0, t_max: sched.t_max() - 1 });
    }
    if x_next.shape() != n_est.shape() {
        return Err(DiffusionError::ShapeMismatch(format!(
            "x {:?} vs noise estimate {:?}",
            x_next.shape(),
            n_est.shape()
        )));
    }
    if t == 0 && z.is_some() {
        return Err(DiffusionError::NoiseAtFinalStep);
    }
    let alpha = sched.alpha(t + 1)?;
    let ab = sched.alpha_bar(t + 1)?;
    let coef = (1.0 - alpha) / (1.0 - ab).sqrt();
    let mut out = (x_next - &(n_est * coef)) / alpha.sqrt();
    if let Some(z) = z {
        if z.shape() != x_next.shape() {
            return Err(DiffusionError::ShapeMismatch(format!(
                "x {:?} vs z {:?}",
                x_next.shape(),
                z.shape()
            )));
        }
        out = out + &(z * sched.sigma(t + 1)?);
    }
    Ok(out)
}

fn check_estimate(est: &Array3<f64>, want: &[usize], t: usize) -> Result<()> {
    if est.shape() != want {
        return Err(DiffusionError::ShapeMismatch(format!(
            "denoiser output {:?}, expected {:?}",
            est.shape(),
            want
        )));
    }
    if !est.iter().all(|x| x.is_finite()) {
        return Err(DiffusionError::NonFinite { what: "noise estimate", t });
    }
    Ok(())
}

/// Run the DDIM reverse process from `state` (which must sit at `t = T`)
/// down to `t = 0`, returning the unclamped SAI-layout result.
///
/// Each sub-step predicts `x0_hat = (x_t - sqrt(1 - alpha_bar(t)) * n_est)
/// / sqrt(alpha_bar(t))` and re-projects it to the previous kept timestep;
/// with `eta = 0` the trajectory is fully deterministic.
pub fn ddim_reverse(
    denoiser: &dyn Denoiser,
    c: &ConditionSignal,
    cfg: &SamplerConfig,
    sched: &NoiseSchedule,
    state: DiffusionState,
) -> Result<Array3<f64>> {
    cfg.validate(sched)?;
    let t_max = sched.t_max();
    if state.t != t_max {
        return Err(DiffusionError::InvalidTimestep { t: state.t, lo: t_max, t_max });
    }
    let stride = t_max / cfg.steps;
    let shape = state.x_t.shape().to_vec();
    let mut x = state.x_t;
    for i in (1..=cfg.steps).rev() {
        let t_cur = i * stride;
        let t_prev = (i - 1) * stride;
        let est = denoiser.predict_noise(&x, t_cur, c)?;
        check_estimate(&est, &shape, t_cur)?;
        let ab_cur = sched.alpha_bar(t_cur)?;
        let ab_prev = sched.alpha_bar(t_prev)?;
        let x0_hat = (&x - &(&est * (1.0 - ab_cur).sqrt())) / ab_cur.sqrt();
        let sigma = cfg.eta
            * ((1.0 - ab_prev) / (1.0 - ab_cur)).sqrt()
            * (1.0 - ab_cur / ab_prev).sqrt();
        let dir = (1.0 - ab_prev - sigma * sigma).max(0.0).sqrt();
        x = &(x0_hat * ab_prev.sqrt()) + &(&est * dir);
        if sigma > 0.0 && t_prev > 0 {
            let z = gaussian_field(
                (shape[0], shape[1], shape[2]),
                state.rng_seed,
                t_cur as u64,
            );
            x = x + &(z * sigma);
        }
    }
    Ok(x)
}

/// Run the full ancestral reverse process from `state.t` down to zero,
/// injecting fresh noise at every step except the last.
pub fn ddpm_reverse(
    denoiser: &dyn Denoiser,
    c: &ConditionSignal,
    sched: &NoiseSchedule,
    state: DiffusionState,
) -> Result<Array3<f64>> {
    if state.t < 1 || state.t > sched.t_max() {
        return Err(DiffusionError::InvalidTimestep { t: state.t, lo: 1, t_max: sched.t_max() });
    }
    let shape = state.x_t.shape().to_vec();
    let dims = (shape[0], shape[1], shape[2]);
    let mut x = state.x_t;
    for t_cur in (1..=state.t).rev() {
        let est = denoiser.predict_noise(&x, t_cur, c)?;
        check_estimate(&est, &shape, t_cur)?;
        let z = if t_cur > 1 {
            Some(gaussian_field(dims, state.rng_seed, t_cur as u64))
        } else {
            None
        };
        x = ddpm_step(&x, &est, t_cur - 1, sched, z.as_ref())?;
    }
    Ok(x)
}

fn validate_shape(c: &ConditionSignal, shape: [usize; 5]) -> Result<(usize, usize, usize)> {
    let [u, v, h, w, ch] = shape;
    let (cu, cv, chh, cww, _) = c.data().dim();
    if (cu, cv, chh, cww) != (u, v, h, w) || c.image_channels() != ch {
        return Err(DiffusionError::ShapeMismatch(format!(
            "requested [{u}, {v}, {h}, {w}, {ch}] but condition is [{cu}, {cv}, {chh}, {cww}] \
             with {} image channels",
            c.image_channels()
        )));
    }
    Ok((u * h, v * w, ch))
}

fn finalize(x: Array3<f64>, u: usize, v: usize) -> Result<LightField> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(DiffusionError::NonFinite { what: "sample", t: 0 });
    }
    let clamped = x.mapv(|v| v.clamp(0.0, 1.0));
    Ok(SaiGridImage::from_parts(clamped, u, v)?.to_light_field()?)
}

/// Generate a light field with the DDIM sampler. `shape` is
/// `[U, V, H, W, C]` and must agree with the condition.
pub fn ddim_sample(
    denoiser: &dyn Denoiser,
    c: &ConditionSignal,
    cfg: &SamplerConfig,
    sched: &NoiseSchedule,
    shape: [usize; 5],
) -> Result<LightField> {
    let sai = validate_shape(c, shape)?;
    let state = DiffusionState::draw_initial(sai, sched, cfg.seed);
    let x0 = ddim_reverse(denoiser, c, cfg, sched, state)?;
    finalize(x0, shape[0], shape[1])
}

/// Generate a light field with the full-length ancestral sampler.
pub fn ddpm_sample(
    denoiser: &dyn Denoiser,
    c: &ConditionSignal,
    sched: &NoiseSchedule,
    shape: [usize; 5],
    seed: u64,
) -> Result<LightField> {
    let sai = validate_shape(c, shape)?;
    let state = DiffusionState::draw_initial(sai, sched, seed);
    let x0 = ddpm_reverse(denoiser, c, sched, state)?;
    finalize(x0, shape[0], shape[1])
}
