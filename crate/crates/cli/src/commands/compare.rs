//! `compare`: align runs by iteration, aggregate mean and standard deviation
//! across seeds per method label, and render overlay curves.

use crate::commands::train::METRICS_FILE;
use crate::config::{method_label, read_manifest};
use crate::csvlog::{read_metrics, MetricsRow};
use crate::plot::{render_svg, Panel, Series};
use crate::CliError;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const COMPARE_FILE: &str = "compare.csv";
pub const COMPARE_PLOT: &str = "compare.svg";

struct LabelGroup {
    runs: Vec<Vec<MetricsRow>>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn cmd_compare(run_dirs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    if run_dirs.is_empty() {
        return Err(CliError::config("compare needs at least one run directory"));
    }
    let mut env_id: Option<String> = None;
    let mut groups: BTreeMap<String, LabelGroup> = BTreeMap::new();
    for dir in run_dirs {
        let config = read_manifest(dir)?;
        match &env_id {
            None => env_id = Some(config.env_id.clone()),
            Some(id) if *id == config.env_id => {}
            Some(id) => {
                return Err(CliError::config(format!(
                    "runs mix environments: {} has '{}', expected '{id}'",
                    dir.display(),
                    config.env_id
                )))
            }
        }
        let rows = read_metrics(&dir.join(METRICS_FILE))?;
        if rows.is_empty() {
            return Err(CliError::failure(format!("{} has no metrics rows", dir.display())));
        }
        groups
            .entry(method_label(&config))
            .or_insert_with(|| LabelGroup { runs: Vec::new() })
            .runs
            .push(rows);
    }
    let env_id = env_id.expect("at least one run");
    let common_len = groups
        .values()
        .flat_map(|g| g.runs.iter().map(|r| r.len()))
        .min()
        .expect("non-empty");

    // combined CSV: per label, mean and std of return and symmetry metric
    let labels: Vec<&String> = groups.keys().collect();
    let mut header = String::from("iter");
    for label in &labels {
        let _ = write!(
            header,
            ",{label}_return_mean,{label}_return_std,{label}_symmetry_mean,{label}_symmetry_std"
        );
    }
    let mut csv = header.clone();
    csv.push('\n');

    let mut return_panel = Vec::new();
    let mut symmetry_panel = Vec::new();
    for label in &labels {
        return_panel.push(Series {
            label: (*label).clone(),
            points: Vec::with_capacity(common_len),
        });
        symmetry_panel.push(Series {
            label: (*label).clone(),
            points: Vec::with_capacity(common_len),
        });
    }

    for i in 0..common_len {
        let iter = groups.values().next().unwrap().runs[0][i].iter;
        let mut line = format!("{iter}");
        for (li, label) in labels.iter().enumerate() {
            let group = &groups[*label];
            let returns: Vec<f64> = group.runs.iter().map(|r| r[i].mean_return).collect();
            let metrics: Vec<f64> = group.runs.iter().map(|r| r[i].symmetry_metric).collect();
            let (rm, rs) = mean_std(&returns);
            let (sm, ss) = mean_std(&metrics);
            let _ = write!(line, ",{rm},{rs},{sm},{ss}");
            return_panel[li].points.push((iter as f64, rm));
            symmetry_panel[li].points.push((iter as f64, sm));
        }
        csv.push_str(&line);
        csv.push('\n');
    }

    std::fs::create_dir_all(out)
        .map_err(|e| CliError::failure(format!("cannot create {}: {e}", out.display())))?;
    std::fs::write(out.join(COMPARE_FILE), csv)
        .map_err(|e| CliError::failure(format!("cannot write compare.csv: {e}")))?;
    let panels = [
        Panel {
            title: format!("episodic return ({env_id}, mean over seeds)"),
            x_label: "iteration".into(),
            y_label: "mean_return".into(),
            series: return_panel,
        },
        Panel {
            title: "symmetry metric (mean over seeds)".into(),
            x_label: "iteration".into(),
            y_label: "symmetry_metric".into(),
            series: symmetry_panel,
        },
    ];
    std::fs::write(out.join(COMPARE_PLOT), render_svg(&panels))
        .map_err(|e| CliError::failure(format!("cannot write compare.svg: {e}")))?;
    println!(
        "compared {} runs across {} methods over {common_len} iterations; outputs in {}",
        run_dirs.len(),
        labels.len(),
        out.display()
    );
    Ok(())
}
