//! `ablate-naive`: the same seed trained twice under symmetry augmentation —
//! once with the corrected update rule (stored original-sample denominators)
//! and once with the naive rule (denominators re-evaluated at transformed
//! pairs) — logging the augmented-sample log-probability diagnostic for both.

use crate::commands::train::{resolve_out_dir, run_training, METRICS_FILE};
use crate::config;
use crate::csvlog::read_metrics;
use crate::plot::{render_svg, Panel, Series};
use crate::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use symmrl::learner::SymmetryMode;

pub const ABLATE_FILE: &str = "ablate.csv";
pub const ABLATE_PLOT: &str = "ablate.svg";

pub fn cmd_ablate_naive(
    config_path: &Path,
    sets: &[String],
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<(), CliError> {
    let mut pairs = config::parse_config_file(config_path)?;
    pairs.extend(config::parse_set_overrides(sets)?);
    let mut base = config::build_config(&pairs)?;
    base.symmetry_mode = SymmetryMode::Aug;
    base.naive_aug_ablation = false;

    let out_dir = resolve_out_dir(&out.unwrap_or_else(|| {
        PathBuf::from(format!("{}-ablate-s{}", base.env_id, base.seed))
    }));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::failure(format!("cannot create {}: {e}", out_dir.display())))?;

    let corrected = run_training(base.clone(), out_dir.join("corrected"), quiet)?;
    if let Some(msg) = &corrected.failure {
        return Err(CliError::failure(format!(
            "corrected-rule run failed: {msg}"
        )));
    }
    let mut naive_config = base.clone();
    naive_config.naive_aug_ablation = true;
    let naive = run_training(naive_config, out_dir.join("naive"), quiet)?;
    if let Some(msg) = &naive.failure {
        eprintln!("note: naive run aborted early, as instability predicts: {msg}");
    }

    let corrected_rows = read_metrics(&corrected.out_dir.join(METRICS_FILE))?;
    let naive_rows = read_metrics(&naive.out_dir.join(METRICS_FILE))?;

    let mut csv = String::from(
        "iter,corrected_mean_aug_logp,naive_mean_aug_logp,corrected_mean_return,naive_mean_return\n",
    );
    for (i, row) in corrected_rows.iter().enumerate() {
        let (n_logp, n_ret) = naive_rows
            .get(i)
            .map(|r| (r.mean_aug_logp, r.mean_return))
            .unwrap_or((f64::NAN, f64::NAN));
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.iter, row.mean_aug_logp, n_logp, row.mean_return, n_ret
        );
    }
    std::fs::write(out_dir.join(ABLATE_FILE), csv)
        .map_err(|e| CliError::failure(format!("cannot write ablate.csv: {e}")))?;

    let logp_series = |label: &str, rows: &[crate::csvlog::MetricsRow], pick: fn(&crate::csvlog::MetricsRow) -> f64| Series {
        label: label.to_string(),
        points: rows.iter().map(|r| (r.iter as f64, pick(r))).collect(),
    };
    let panels = [
        Panel {
            title: format!("augmented-sample log probability ({})", base.env_id),
            x_label: "iteration".into(),
            y_label: "mean_aug_logp".into(),
            series: vec![
                logp_series("corrected", &corrected_rows, |r| r.mean_aug_logp),
                logp_series("naive", &naive_rows, |r| r.mean_aug_logp),
            ],
        },
        Panel {
            title: "episodic return".into(),
            x_label: "iteration".into(),
            y_label: "mean_return".into(),
            series: vec![
                logp_series("corrected", &corrected_rows, |r| r.mean_return),
                logp_series("naive", &naive_rows, |r| r.mean_return),
            ],
        },
    ];
    std::fs::write(out_dir.join(ABLATE_PLOT), render_svg(&panels))
        .map_err(|e| CliError::failure(format!("cannot write ablate.svg: {e}")))?;

    println!(
        "ablation complete: corrected {} iters, naive {} iters, outputs in {}",
        corrected.completed_iters,
        naive.completed_iters,
        out_dir.display()
    );
    Ok(())
}
