//! Metrics CSV writing and reading. The header is part of the external
//! contract and must match byte for byte.

use crate::CliError;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use symmrl::learner::MetricsRecord;

pub const METRICS_HEADER: &str =
    "iter,mean_return,symmetry_metric,mean_aug_logp,surrogate,value_loss,entropy,mirror,total,wall_time_s";

pub struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::failure(format!("cannot create {}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{METRICS_HEADER}")
            .map_err(|e| CliError::failure(format!("cannot write metrics: {e}")))?;
        Ok(MetricsWriter { out })
    }

    pub fn append(&mut self, record: &MetricsRecord) -> Result<(), CliError> {
        writeln!(self.out, "{}", format_row(record))
            .map_err(|e| CliError::failure(format!("cannot write metrics: {e}")))?;
        self.out
            .flush()
            .map_err(|e| CliError::failure(format!("cannot flush metrics: {e}")))
    }
}

pub fn format_row(r: &MetricsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.iter,
        r.mean_return,
        r.symmetry_metric,
        r.mean_aug_logp,
        r.surrogate,
        r.value_loss,
        r.entropy,
        r.mirror,
        r.total,
        r.wall_time_s
    )
}

/// One parsed metrics row.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub iter: usize,
    pub mean_return: f64,
    pub symmetry_metric: f64,
    pub mean_aug_logp: f64,
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mirror: f64,
    pub total: f64,
    pub wall_time_s: f64,
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::failure(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(CliError::failure(format!(
                "{}: unexpected metrics header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(CliError::failure(format!(
                "{}:{}: expected 10 fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let f = |i: usize| -> Result<f64, CliError> {
            fields[i].parse::<f64>().map_err(|_| {
                CliError::failure(format!(
                    "{}:{}: bad number '{}'",
                    path.display(),
                    lineno + 2,
                    fields[i]
                ))
            })
        };
        rows.push(MetricsRow {
            iter: fields[0].parse::<usize>().map_err(|_| {
                CliError::failure(format!("{}:{}: bad iter", path.display(), lineno + 2))
            })?,
            mean_return: f(1)?,
            symmetry_metric: f(2)?,
            mean_aug_logp: f(3)?,
            surrogate: f(4)?,
            value_loss: f(5)?,
            entropy: f(6)?,
            mirror: f(7)?,
            total: f(8)?,
            wall_time_s: f(9)?,
        });
    }
    Ok(rows)
}
