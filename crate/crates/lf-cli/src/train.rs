//! The training loop: denoising objective over synthetic patches, AdamW
//! with cosine annealing, CSV logging, and atomic checkpoints.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use distg_net::{cosine_lr, save_checkpoint, AdamW, DistgUnet, NetError};
use lf_core::{build_condition, layout, Interp};
use lf_diffusion::make_schedule;
use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::adapter::net_input;
use crate::config::{serialize_config, RunConfig};
use crate::dataset::load_training_patches;
use crate::error::CliError;
use crate::Result;

/// Artifacts and statistics of a completed training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Per-step mean batch loss, in step order.
    pub losses: Vec<f64>,
    /// Final checkpoint location.
    pub ckpt_path: PathBuf,
    /// CSV log location.
    pub csv_path: PathBuf,
}

impl TrainReport {
    /// Mean loss of the first `n` steps.
    pub fn leading_mean(&self, n: usize) -> f64 {
        let k = n.min(self.losses.len());
        self.losses[..k].iter().sum::<f64>() / k as f64
    }

    /// Mean loss of the last `n` steps.
    pub fn trailing_mean(&self, n: usize) -> f64 {
        let k = n.min(self.losses.len());
        self.losses[self.losses.len() - k..].iter().sum::<f64>() / k as f64
    }
}

/// Root-sum-square of every accumulated gradient, for abort diagnostics.
fn grad_norm(net: &mut DistgUnet<f32>) -> f64 {
    let mut sq = 0.0;
    net.visit_pairs_mut("", &mut |_name, _value, grad| {
        sq += grad.iter().map(|&g| (g as f64) * (g as f64)).sum::<f64>();
    });
    sq.sqrt()
}

/// Train a fresh denoiser on the dataset under `dataset_dir`, writing the
/// checkpoint, the `step,loss,lr` CSV log, and a copy of the resolved
/// config into `out_dir`.  Single-threaded and bit-reproducible in
/// `(config, seed)`.
pub fn cmd_train(cfg: &RunConfig, dataset_dir: &Path, out_dir: &Path) -> Result<TrainReport> {
    cfg.validate()?;
    let patches = load_training_patches(cfg, dataset_dir)?;

    // Precompute per patch: the clean macro-pixel mosaic and the
    // conditioning mosaic built from the ground-truth disparity.
    let mut x0_mps: Vec<Array3<f64>> = Vec::with_capacity(patches.len());
    let mut cond_mps: Vec<Array3<f64>> = Vec::with_capacity(patches.len());
    for patch in &patches {
        x0_mps.push(layout::five_to_macropixel(patch.lf_patch.data()));
        let cond = build_condition(
            &patch.center,
            &patch.gt_disparity,
            cfg.data.u,
            cfg.data.v,
            cfg.model.pe_dim,
            Interp::Bilinear,
        )?;
        cond_mps.push(cond.to_macropixel_array());
    }
    drop(patches);

    let sched = make_schedule(cfg.diffusion.t, cfg.diffusion.beta_1, cfg.diffusion.beta_t)?;
    let mut net = DistgUnet::<f32>::build_with_seed(cfg.model.net.clone(), cfg.train.seed)?;
    let mut opt = AdamW::new(cfg.train.weight_decay);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.train.seed);

    std::fs::create_dir_all(out_dir)?;
    let ckpt_path = out_dir.join("model.ckpt");
    let csv_path = out_dir.join("train_log.csv");
    let mut csv = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    writeln!(csv, "step,loss,lr")?;
    lf_core::io::write_bytes_atomic(
        &out_dir.join("config.cfg"),
        serialize_config(cfg).as_bytes(),
    )?;

    let mp_dim = x0_mps[0].dim();
    let total = cfg.train.steps;
    let batch = cfg.train.batch;
    let grad_scale = 1.0 / batch as f32;
    let mut losses = Vec::with_capacity(total);
    for step in 0..total {
        let lr = cosine_lr(cfg.train.lr, step, total);
        net.zero_grads();
        let mut loss_sum = 0.0;
        for _ in 0..batch {
            let idx = rng.random_range(0..x0_mps.len());
            let t = rng.random_range(1..=sched.t_max());
            let eps = Array3::from_shape_fn(mp_dim, |_| rng.sample::<f64, _>(StandardNormal));
            let ab = sched.alpha_bar(t)?;
            let x_t = &x0_mps[idx] * ab.sqrt() + &eps * (1.0 - ab).sqrt();
            let input = net_input(&x_t, &cond_mps[idx]);
            let target = eps.mapv(|v| v as f32);
            let loss = match net.loss_and_backward(&input, t, &target, grad_scale) {
                Ok(l) => l,
                Err(NetError::NonFinite(what)) => {
                    return Err(CliError::Numeric(format!(
                        "non-finite {what} at step {step}; lr {lr:.6e}, grad norm {:.6e}",
                        grad_norm(&mut net)
                    )))
                }
                Err(e) => return Err(e.into()),
            };
            loss_sum += loss;
        }
        let loss = loss_sum / batch as f64;
        if !loss.is_finite() {
            return Err(CliError::Numeric(format!(
                "non-finite batch loss at step {step}; lr {lr:.6e}, grad norm {:.6e}",
                grad_norm(&mut net)
            )));
        }
        opt.step(lr, |f| net.visit_pairs_mut("", f));
        writeln!(csv, "{step},{loss},{lr}")?;
        losses.push(loss);
        if (step + 1) % cfg.train.ckpt_every == 0 {
            save_checkpoint(&net, &ckpt_path)?;
        }
    }
    save_checkpoint(&net, &ckpt_path)?;
    csv.flush()?;
    Ok(TrainReport { losses, ckpt_path, csv_path })
}
