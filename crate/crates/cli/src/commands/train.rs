//! `train`: run the full collect -> GAE -> (augment) -> update loop, logging
//! one metrics row per iteration.

use crate::config::{self, method_label};
use crate::csvlog::MetricsWriter;
use crate::paramio::{self, POLICY_FILE};
use crate::CliError;
use std::path::{Path, PathBuf};
use symmrl::learner::{TrainConfig, Trainer};

pub const METRICS_FILE: &str = "metrics.csv";

/// Where run directories land: `$SYMMRL_OUT_ROOT` (default `.`) unless the
/// requested path is absolute.
pub fn resolve_out_dir(requested: &Path) -> PathBuf {
    if requested.is_absolute() {
        requested.to_path_buf()
    } else {
        let root = std::env::var_os("SYMMRL_OUT_ROOT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        root.join(requested)
    }
}

pub fn default_run_name(config: &TrainConfig) -> PathBuf {
    PathBuf::from(format!(
        "{}-{}-s{}",
        config.env_id,
        method_label(config),
        config.seed
    ))
}

/// Outcome of a training run that got as far as producing output files.
pub struct TrainOutcome {
    pub out_dir: PathBuf,
    pub completed_iters: usize,
    /// Numeric failure that aborted the run early, if any.
    pub failure: Option<String>,
}

/// Run one training job into `out_dir` (manifest first, metrics per
/// iteration, final parameters on success). Numeric failures are reported in
/// the outcome rather than as `Err`, with all rows up to the failure kept.
pub fn run_training(
    config: TrainConfig,
    out_dir: PathBuf,
    quiet: bool,
) -> Result<TrainOutcome, CliError> {
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::failure(format!("cannot create {}: {e}", out_dir.display())))?;
    config::write_manifest(&out_dir, &config)?;
    let mut trainer = Trainer::new(config.clone())?;
    let mut writer = MetricsWriter::create(&out_dir.join(METRICS_FILE))?;

    let progress_every = (config.total_iters / 20).max(1);
    let mut failure = None;
    while trainer.completed_iters() < config.total_iters {
        match trainer.run_iteration() {
            Ok(record) => {
                writer.append(&record)?;
                if !quiet && (record.iter + 1) % progress_every == 0 {
                    eprintln!(
                        "[{}] iter {:>4}/{} return {:>10.3} symmetry {:.3e}",
                        out_dir.display(),
                        record.iter + 1,
                        config.total_iters,
                        record.mean_return,
                        record.symmetry_metric,
                    );
                }
            }
            Err(err) => {
                failure = Some(format!(
                    "{err} (last good iteration: {})",
                    trainer.completed_iters() as i64 - 1
                ));
                break;
            }
        }
    }

    paramio::save_policy(&out_dir.join(POLICY_FILE), trainer.policy())?;
    config::finish_manifest(&out_dir)?;
    Ok(TrainOutcome {
        out_dir,
        completed_iters: trainer.completed_iters(),
        failure,
    })
}

pub fn cmd_train(
    config_path: &Path,
    sets: &[String],
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<(), CliError> {
    let mut pairs = config::parse_config_file(config_path)?;
    pairs.extend(config::parse_set_overrides(sets)?);
    let config = config::build_config(&pairs)?;
    let out_dir = resolve_out_dir(&out.unwrap_or_else(|| default_run_name(&config)));
    let outcome = run_training(config, out_dir, quiet)?;
    match outcome.failure {
        None => {
            println!(
                "run complete: {} iterations, outputs in {}",
                outcome.completed_iters,
                outcome.out_dir.display()
            );
            Ok(())
        }
        Some(msg) => Err(CliError::failure(format!(
            "training aborted after {} iterations: {msg}",
            outcome.completed_iters
        ))),
    }
}
