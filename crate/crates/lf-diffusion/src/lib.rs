//! Conditional diffusion on light fields: linear noise schedules, the
//! closed-form forward corruption, the denoising training objective, and
//! DDPM/DDIM reverse samplers.
//!
//! Arrays exchanged with the denoiser are SAI-mosaic `[U*H, V*W, C]`
//! images; samplers clamp their final output to `[0, 1]` and return a
//! typed [`lf_core::LightField`].

mod denoiser;
mod error;
mod forward;
mod sampler;
mod schedule;

pub use denoiser::Denoiser;
pub use error::DiffusionError;
pub use forward::{forward_sample, training_loss};
pub use sampler::{
    ddim_reverse, ddim_sample, ddpm_reverse, ddpm_sample, ddpm_step, DiffusionState,
    SampleSidecar, SamplerConfig, SamplerKind,
};
pub use schedule::{make_schedule, NoiseSchedule, DEFAULT_BETA_1, DEFAULT_BETA_T, DEFAULT_T};

pub type Result<T> = std::result::Result<T, DiffusionError>;
