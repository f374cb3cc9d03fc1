//! CLI error type and its mapping onto process exit codes.

use thiserror::Error;

/// Exit code for configuration, input, or shape problems.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for numerical aborts (non-finite loss or samples).
pub const EXIT_NUMERIC: i32 = 3;

/// Top-level failure of a CLI command.
///
/// Every upstream error collapses into one of two buckets so that the
/// process exit code stays meaningful: validation problems (bad config,
/// missing files, shape mismatches) exit with 2, numerical aborts
/// (non-finite loss or samples) with 3.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration, arguments, or input data.
    #[error("{0}")]
    Validation(String),

    /// The run produced non-finite numbers and was aborted.
    #[error("numerical abort: {0}")]
    Numeric(String),
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

macro_rules! validation_from {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Validation(e.to_string())
            }
        })*
    };
}

validation_from!(
    lf_core::LfError,
    lf_scene::SceneError,
    lf_analysis::AnalysisError,
    distg_net::NetError,
    std::io::Error,
    serde_json::Error,
);

impl From<lf_diffusion::DiffusionError> for CliError {
    fn from(e: lf_diffusion::DiffusionError) -> Self {
        match e {
            lf_diffusion::DiffusionError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
