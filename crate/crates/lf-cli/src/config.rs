//! Run configuration: a flat, diff-friendly `section.key = value` text
//! format covering data generation, the model, training, the diffusion
//! schedule, and sampling.
//!
//! Unset keys fall back to the desk-scale defaults; unknown keys are
//! rejected.  Parsing the output of [`serialize_config`] reproduces the
//! configuration exactly.

use distg_net::DistgNetConfig;
use lf_diffusion::SamplerKind;

use crate::error::CliError;
use crate::Result;

/// Synthetic-dataset settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    /// Number of training scenes.
    pub scenes: usize,
    /// Number of held-out validation scenes.
    pub val_scenes: usize,
    /// Angular rows.
    pub u: usize,
    /// Angular columns.
    pub v: usize,
    /// Spatial height.
    pub h: usize,
    /// Spatial width.
    pub w: usize,
    /// Colour channels (1 or 3).
    pub channels: usize,
    /// Disparity interval scenes are drawn from.
    pub disparity_range: [f64; 2],
    /// Master seed; per-scene seeds derive from it.
    pub seed: u64,
    /// Training patch side length.
    pub patch: usize,
    /// Stride of the patch grid.
    pub patch_stride: usize,
    /// Maximum random patch jitter in pixels.
    pub jitter: usize,
}

/// Model settings: the denoiser architecture plus the positional-encoding
/// depth used to assemble its conditioning input.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Denoiser architecture.
    pub net: DistgNetConfig,
    /// Channels of the angular positional encoding.
    pub pe_dim: usize,
}

/// Optimisation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Total optimisation steps.
    pub steps: usize,
    /// Samples per step.
    pub batch: usize,
    /// Peak learning rate.
    pub lr: f64,
    /// Optimiser name; only `adamw` is supported.
    pub optimizer: String,
    /// Learning-rate schedule; only `cosine` is supported.
    pub schedule: String,
    /// Decoupled weight decay applied to conv weights.
    pub weight_decay: f64,
    /// Checkpoint cadence in steps.
    pub ckpt_every: usize,
    /// Seed for batch composition and noise draws.
    pub seed: u64,
}

/// Noise-schedule settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionConfig {
    /// Number of diffusion timesteps T.
    pub t: usize,
    /// Variance of the first step.
    pub beta_1: f64,
    /// Variance of the last step.
    pub beta_t: f64,
}

/// Sampling settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    /// Reverse-process sampler.
    pub sampler: SamplerKind,
    /// Denoiser evaluations (must divide T for DDIM).
    pub steps: usize,
    /// DDIM stochasticity (0 = deterministic).
    pub eta: f64,
    /// Seed of the sampling trajectory.
    pub seed: u64,
    /// Disparity interval the depth input is rescaled into.
    pub disparity_range: [f64; 2],
}

/// Complete configuration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub diffusion: DiffusionConfig,
    pub sample: SampleConfig,
}

impl Default for RunConfig {
    /// Desk-scale defaults: 5x5 views on 16x16 pixels, a ~147k-parameter
    /// denoiser, AdamW at 1.5e-4 with cosine annealing and batch 16.
    fn default() -> Self {
        RunConfig {
            data: DataConfig {
                scenes: 256,
                val_scenes: 8,
                u: 5,
                v: 5,
                h: 16,
                w: 16,
                channels: 3,
                disparity_range: [-2.0, 2.0],
                seed: 7,
                patch: 16,
                patch_stride: 16,
                jitter: 0,
            },
            model: ModelConfig {
                net: DistgNetConfig {
                    angular: 5,
                    base_channels: 16,
                    scales: 3,
                    blocks_per_scale: 2,
                    time_embed_dim: 64,
                    in_channels: 22,
                    out_channels: 3,
                },
                pe_dim: 16,
            },
            train: TrainConfig {
                steps: 2000,
                batch: 16,
                lr: 1.5e-4,
                optimizer: "adamw".into(),
                schedule: "cosine".into(),
                weight_decay: 0.01,
                ckpt_every: 500,
                seed: 0,
            },
            diffusion: DiffusionConfig { t: 1000, beta_1: 1e-4, beta_t: 2e-2 },
            sample: SampleConfig {
                sampler: SamplerKind::Ddim,
                steps: 100,
                eta: 0.0,
                seed: 0,
                disparity_range: [-2.0, 2.0],
            },
        }
    }
}

impl RunConfig {
    /// Cross-field consistency checks.
    pub fn validate(&self) -> Result<()> {
        let c = self.data.channels;
        if self.model.net.in_channels != 2 * c + self.model.pe_dim {
            return Err(CliError::Validation(format!(
                "model.in_channels ({}) must equal 2*data.channels + model.pe_dim ({})",
                self.model.net.in_channels,
                2 * c + self.model.pe_dim
            )));
        }
        if self.model.net.out_channels != c {
            return Err(CliError::Validation(format!(
                "model.out_channels ({}) must equal data.channels ({c})",
                self.model.net.out_channels
            )));
        }
        if self.model.net.angular != self.data.u || self.model.net.angular != self.data.v {
            return Err(CliError::Validation(format!(
                "model.angular ({}) must equal data.u ({}) and data.v ({})",
                self.model.net.angular, self.data.u, self.data.v
            )));
        }
        self.model.net.validate()?;
        if self.train.optimizer != "adamw" {
            return Err(CliError::Validation(format!(
                "train.optimizer must be 'adamw', got '{}'",
                self.train.optimizer
            )));
        }
        if self.train.schedule != "cosine" {
            return Err(CliError::Validation(format!(
                "train.schedule must be 'cosine', got '{}'",
                self.train.schedule
            )));
        }
        if self.train.steps == 0 || self.train.batch == 0 || self.train.ckpt_every == 0 {
            return Err(CliError::Validation(
                "train.steps, train.batch, and train.ckpt_every must be positive".into(),
            ));
        }
        if !(self.train.lr > 0.0 && self.train.lr.is_finite()) {
            return Err(CliError::Validation(format!(
                "train.lr must be positive and finite, got {}",
                self.train.lr
            )));
        }
        if !(self.train.weight_decay >= 0.0 && self.train.weight_decay.is_finite()) {
            return Err(CliError::Validation(format!(
                "train.weight_decay must be non-negative, got {}",
                self.train.weight_decay
            )));
        }
        for (name, [lo, hi]) in [
            ("data.disparity", self.data.disparity_range),
            ("sample.disparity", self.sample.disparity_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CliError::Validation(format!(
                    "{name}_min/{name}_max must be finite with min < max, got [{lo}, {hi}]"
                )));
            }
        }
        if self.data.patch == 0
            || self.data.patch > self.data.h.min(self.data.w)
            || self.data.patch_stride == 0
        {
            return Err(CliError::Validation(format!(
                "data.patch ({}) and data.patch_stride ({}) must be positive with patch <= min(H, W)",
                self.data.patch, self.data.patch_stride
            )));
        }
        let divisor = 1usize << (self.model.net.scales - 1);
        if self.data.patch % divisor != 0 {
            return Err(CliError::Validation(format!(
                "data.patch ({}) must be divisible by 2^(scales-1) = {divisor}",
                self.data.patch
            )));
        }
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        CliError::Validation(format!("cannot parse value '{value}' for key '{key}'"))
    })
}

fn parse_sampler(key: &str, value: &str) -> Result<SamplerKind> {
    match value {
        "ddim" => Ok(SamplerKind::Ddim),
        "ddpm" => Ok(SamplerKind::Ddpm),
        other => Err(CliError::Validation(format!(
            "key '{key}' accepts 'ddim' or 'ddpm', got '{other}'"
        ))),
    }
}

fn sampler_name(kind: SamplerKind) -> &'static str {
    match kind {
        SamplerKind::Ddim => "ddim",
        SamplerKind::Ddpm => "ddpm",
    }
}

/// Parse the flat `section.key = value` format.  Blank lines and lines
/// starting with `#` are skipped; keys not set keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "data.scenes" => cfg.data.scenes = parse_value(key, value)?,
            "data.val_scenes" => cfg.data.val_scenes = parse_value(key, value)?,
            "data.u" => cfg.data.u = parse_value(key, value)?,
            "data.v" => cfg.data.v = parse_value(key, value)?,
            "data.h" => cfg.data.h = parse_value(key, value)?,
            "data.w" => cfg.data.w = parse_value(key, value)?,
            "data.channels" => cfg.data.channels = parse_value(key, value)?,
            "data.disparity_min" => cfg.data.disparity_range[0] = parse_value(key, value)?,
            "data.disparity_max" => cfg.data.disparity_range[1] = parse_value(key, value)?,
            "data.seed" => cfg.data.seed = parse_value(key, value)?,
            "data.patch" => cfg.data.patch = parse_value(key, value)?,
            "data.patch_stride" => cfg.data.patch_stride = parse_value(key, value)?,
            "data.jitter" => cfg.data.jitter = parse_value(key, value)?,
            "model.angular" => cfg.model.net.angular = parse_value(key, value)?,
            "model.base_channels" => cfg.model.net.base_channels = parse_value(key, value)?,
            "model.scales" => cfg.model.net.scales = parse_value(key, value)?,
            "model.blocks_per_scale" => {
                cfg.model.net.blocks_per_scale = parse_value(key, value)?
            }
            "model.time_embed_dim" => cfg.model.net.time_embed_dim = parse_value(key, value)?,
            "model.in_channels" => cfg.model.net.in_channels = parse_value(key, value)?,
            "model.out_channels" => cfg.model.net.out_channels = parse_value(key, value)?,
            "model.pe_dim" => cfg.model.pe_dim = parse_value(key, value)?,
            "train.steps" => cfg.train.steps = parse_value(key, value)?,
            "train.batch" => cfg.train.batch = parse_value(key, value)?,
            "train.lr" => cfg.train.lr = parse_value(key, value)?,
            "train.optimizer" => cfg.train.optimizer = value.to_string(),
            "train.schedule" => cfg.train.schedule = value.to_string(),
            "train.weight_decay" => cfg.train.weight_decay = parse_value(key, value)?,
            "train.ckpt_every" => cfg.train.ckpt_every = parse_value(key, value)?,
            "train.seed" => cfg.train.seed = parse_value(key, value)?,
            "diffusion.t" => cfg.diffusion.t = parse_value(key, value)?,
            "diffusion.beta_1" => cfg.diffusion.beta_1 = parse_value(key, value)?,
            "diffusion.beta_t" => cfg.diffusion.beta_t = parse_value(key, value)?,
            "sample.sampler" => cfg.sample.sampler = parse_sampler(key, value)?,
            "sample.steps" => cfg.sample.steps = parse_value(key, value)?,
            "sample.eta" => cfg.sample.eta = parse_value(key, value)?,
            "sample.seed" => cfg.sample.seed = parse_value(key, value)?,
            "sample.disparity_min" => cfg.sample.disparity_range[0] = parse_value(key, value)?,
            "sample.disparity_max" => cfg.sample.disparity_range[1] = parse_value(key, value)?,
            other => {
                return Err(CliError::Validation(format!(
                    "line {}: unknown config key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(cfg)
}

/// Serialize every key in canonical order.  `parse_config` on the result
/// reproduces the input configuration exactly.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let mut push = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    push("data.scenes", cfg.data.scenes.to_string());
    push("data.val_scenes", cfg.data.val_scenes.to_string());
    push("data.u", cfg.data.u.to_string());
    push("data.v", cfg.data.v.to_string());
    push("data.h", cfg.data.h.to_string());
    push("data.w", cfg.data.w.to_string());
    push("data.channels", cfg.data.channels.to_string());
    push("data.disparity_min", cfg.data.disparity_range[0].to_string());
    push("data.disparity_max", cfg.data.disparity_range[1].to_string());
    push("data.seed", cfg.data.seed.to_string());
    push("data.patch", cfg.data.patch.to_string());
    push("data.patch_stride", cfg.data.patch_stride.to_string());
    push("data.jitter", cfg.data.jitter.to_string());
    push("model.angular", cfg.model.net.angular.to_string());
    push("model.base_channels", cfg.model.net.base_channels.to_string());
    push("model.scales", cfg.model.net.scales.to_string());
    push("model.blocks_per_scale", cfg.model.net.blocks_per_scale.to_string());
    push("model.time_embed_dim", cfg.model.net.time_embed_dim.to_string());
    push("model.in_channels", cfg.model.net.in_channels.to_string());
    push("model.out_channels", cfg.model.net.out_channels.to_string());
    push("model.pe_dim", cfg.model.pe_dim.to_string());
    push("train.steps", cfg.train.steps.to_string());
    push("train.batch", cfg.train.batch.to_string());
    push("train.lr", cfg.train.lr.to_string());
    push("train.optimizer", cfg.train.optimizer.clone());
    push("train.schedule", cfg.train.schedule.clone());
    push("train.weight_decay", cfg.train.weight_decay.to_string());
    push("train.ckpt_every", cfg.train.ckpt_every.to_string());
    push("train.seed", cfg.train.seed.to_string());
    push("diffusion.t", cfg.diffusion.t.to_string());
    push("diffusion.beta_1", cfg.diffusion.beta_1.to_string());
    push("diffusion.beta_t", cfg.diffusion.beta_t.to_string());
    push("sample.sampler", sampler_name(cfg.sample.sampler).to_string());
    push("sample.steps", cfg.sample.steps.to_string());
    push("sample.eta", cfg.sample.eta.to_string());
    push("sample.seed", cfg.sample.seed.to_string());
    push("sample.disparity_min", cfg.sample.disparity_range[0].to_string());
    push("sample.disparity_max", cfg.sample.disparity_range[1].to_string());
    s
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = serialize_config(&cfg);
        let reparsed = parse_config(&text).unwrap();
        assert_eq!(cfg, reparsed);
        assert_eq!(text, serialize_config(&reparsed));
    }

    #[test]
    fn overrides_comments_and_blank_lines_parse() {
        let text = "\n# a comment\ntrain.lr = 3e-4\ndata.scenes = 8\nsample.sampler = ddpm\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.train.lr, 3e-4);
        assert_eq!(cfg.data.scenes, 8);
        assert_eq!(cfg.sample.sampler, SamplerKind::Ddpm);
        assert_eq!(cfg.train.batch, 16);
        let round = parse_config(&serialize_config(&cfg)).unwrap();
        assert_eq!(cfg, round);
    }

    #[test]
    fn default_training_settings_match_the_published_recipe() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.train.batch, 16);
        assert_eq!(cfg.train.lr, 1.5e-4);
        assert_eq!(cfg.train.optimizer, "adamw");
        assert_eq!(cfg.train.schedule, "cosine");
        assert_eq!(cfg.diffusion.t, 1000);
        assert_eq!(cfg.diffusion.beta_1, 1e-4);
        assert_eq!(cfg.diffusion.beta_t, 2e-2);
    }

    #[test]
    fn unknown_keys_and_malformed_lines_are_rejected() {
        assert!(matches!(
            parse_config("data.bogus = 3"),
            Err(CliError::Validation(_))
        ));
        assert!(matches!(parse_config("no equals sign"), Err(CliError::Validation(_))));
        assert!(matches!(
            parse_config("train.lr = not-a-number"),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn cross_field_violations_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.model.pe_dim = 10;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.train.optimizer = "sgd".into();
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.data.patch = 10; // not divisible by 2^(scales-1) = 4
        assert!(cfg.validate().is_err());
    }
}

