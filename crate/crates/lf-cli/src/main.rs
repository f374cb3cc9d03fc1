//! `lfgen`: light-field synthesis pipeline driver.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad config,
//! arguments, or inputs), 3 on numerical aborts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lf_cli::{
    cmd_eval, cmd_export_sr, cmd_gen_data, cmd_refocus, cmd_sample, cmd_train, load_config,
    CliError, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "lfgen",
    version,
    about = "Synthesize, train on, and analyze 4D light fields from single images"
)]
struct Cli {
    /// Run configuration file (flat `section.key = value` text); defaults
    /// apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the command-relevant seed (data, train, or sample).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (or file, for refocus/eval).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic light-field dataset.
    GenData,
    /// Train the denoiser on a generated dataset.
    Train {
        /// Dataset directory produced by gen-data.
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Synthesize a light field from one image (+ depth) and a checkpoint.
    Sample {
        /// Trained model checkpoint.
        #[arg(long)]
        ckpt: PathBuf,
        /// Input image (the central view).
        #[arg(long)]
        image: PathBuf,
        /// Depth map (.f32 with meta.json sibling, or 16-bit gray PNG).
        #[arg(long)]
        depth: Option<PathBuf>,
        /// Condition on the unwarped center only (geometry ablation).
        #[arg(long)]
        center_only: bool,
    },
    /// Compare a light-field directory against a reference.
    Eval {
        /// Candidate light-field directory.
        #[arg(long)]
        lf: PathBuf,
        /// Reference light-field directory.
        #[arg(long)]
        reference: PathBuf,
    },
    /// Shift-and-add refocus of a stored light field.
    Refocus {
        /// Light-field directory.
        #[arg(long)]
        lf: PathBuf,
        /// Focal-plane disparity in pixels per view offset.
        #[arg(long)]
        slope: f64,
    },
    /// Export HR/LR super-resolution pairs from a dataset.
    ExportSr {
        /// Dataset directory produced by gen-data.
        #[arg(long)]
        dataset: PathBuf,
        /// Downsampling factor (2 or 4).
        #[arg(long)]
        factor: usize,
    },
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(path) => load_config(path),
        None => Ok(RunConfig::default()),
    }
}

fn required_out(cli: &Cli, what: &str) -> Result<PathBuf, CliError> {
    cli.out
        .clone()
        .ok_or_else(|| CliError::Validation(format!("--out is required for {what}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenData => {
            let mut cfg = resolve_config(cli)?;
            if let Some(seed) = cli.seed {
                cfg.data.seed = seed;
            }
            let out = required_out(cli, "gen-data")?;
            let summary = cmd_gen_data(&cfg, &out)?;
            println!(
                "generated {} training and {} validation scenes ({} patches) in {}",
                summary.train_scenes,
                summary.val_scenes,
                summary.patches,
                out.display()
            );
        }
        Command::Train { dataset } => {
            let mut cfg = resolve_config(cli)?;
            if let Some(seed) = cli.seed {
                cfg.train.seed = seed;
            }
            let out = required_out(cli, "train")?;
            let report = cmd_train(&cfg, dataset, &out)?;
            println!(
                "trained {} steps; first-step loss {:.4}, last-step loss {:.4}; checkpoint {}",
                report.losses.len(),
                report.losses.first().copied().unwrap_or(f64::NAN),
                report.losses.last().copied().unwrap_or(f64::NAN),
                report.ckpt_path.display()
            );
        }
        Command::Sample { ckpt, image, depth, center_only } => {
            let mut cfg = resolve_config(cli)?;
            if let Some(seed) = cli.seed {
                cfg.sample.seed = seed;
            }
            let out = required_out(cli, "sample")?;
            let lf = cmd_sample(&cfg, ckpt, image, depth.as_deref(), *center_only, &out)?;
            println!(
                "sampled a {}x{} view grid at {}x{} into {}",
                lf.u(),
                lf.v(),
                lf.height(),
                lf.width(),
                out.display()
            );
        }
        Command::Eval { lf, reference } => {
            let (_report, json) = cmd_eval(lf, reference, cli.out.as_deref())?;
            match &cli.out {
                Some(path) => println!("wrote metrics to {}", path.display()),
                None => print!("{json}"),
            }
        }
        Command::Refocus { lf, slope } => {
            let out = required_out(cli, "refocus")?;
            cmd_refocus(lf, *slope, &out)?;
            println!("wrote refocused image to {}", out.display());
        }
        Command::ExportSr { dataset, factor } => {
            let out = required_out(cli, "export-sr")?;
            let manifest = cmd_export_sr(dataset, *factor, &out)?;
            println!(
                "exported {} HR/LR pairs at factor {} into {}",
                manifest.pairs.len(),
                manifest.factor,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
