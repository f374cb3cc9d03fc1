use thiserror::Error;

/// Errors from schedule construction, forward corruption, and sampling.
#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("timestep {t} outside [{lo}, {t_max}]")]
    InvalidTimestep { t: usize, lo: usize, t_max: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid sampler config: {0}")]
    InvalidSamplerConfig(String),

    #[error("noise injection requested at the final step (t = 0)")]
    NoiseAtFinalStep,

    #[error("non-finite values in {what} at timestep {t}")]
    NonFinite { what: &'static str, t: usize },

    #[error("denoiser failure: {0}")]
    Denoiser(String),

    #[error(transparent)]
    Core(#[from] lf_core::LfError),
}
