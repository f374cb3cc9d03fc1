//! Pipeline commands behind the `lfgen` binary: synthetic-dataset
//! generation, denoiser training, conditional light-field sampling,
//! evaluation, refocusing, and super-resolution export.
//!
//! Every command is a plain function over a [`RunConfig`] so that tests
//! and the binary share one code path; the binary only adds argument
//! parsing and exit-code mapping.

pub mod adapter;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod imgio;
pub mod refocus_cmd;
pub mod sample;
pub mod sr_cmd;
pub mod train;

#[cfg(test)]
pub(crate) mod testutil;

pub use adapter::{concat_channels, net_input, NetDenoiser};
pub use config::{
    load_config, parse_config, serialize_config, DataConfig, DiffusionConfig, ModelConfig,
    RunConfig, SampleConfig, TrainConfig,
};
pub use dataset::{cmd_gen_data, load_training_patches, GenSummary};
pub use error::{CliError, EXIT_NUMERIC, EXIT_VALIDATION};
pub use eval::{cmd_eval, evaluate, EvalReport, EvalSlopes};
pub use imgio::{load_image, save_image};
pub use refocus_cmd::cmd_refocus;
pub use sample::{cmd_sample, run_sampler};
pub use sr_cmd::cmd_export_sr;
pub use train::{cmd_train, TrainReport};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CliError>;
