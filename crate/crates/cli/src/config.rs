//! Flat `key = value` config files, `--set` overrides, and run manifests.
//!
//! A manifest is itself a valid config file holding the full resolved
//! snapshot (metadata rides along as comments), so re-running from a
//! manifest reproduces the run.

use crate::CliError;
use std::fmt::Write as _;
use std::path::Path;
use symmrl::learner::{SymmetryMode, TrainConfig};
use symmrl::numkit::Activation;

pub const CONFIG_KEYS: &[&str] = &[
    "env_id",
    "symmetry_mode",
    "mirror_weight",
    "gamma",
    "lam",
    "clip_eps",
    "lr",
    "entropy_coef",
    "value_coef",
    "epochs_per_iter",
    "minibatch_size",
    "num_envs",
    "horizon",
    "total_iters",
    "init_scale",
    "seed",
    "naive_aug_ablation",
    "hidden",
    "activation",
];

type Pairs = Vec<(String, String)>;

pub fn parse_config_text(text: &str, source: &str) -> Result<Pairs, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(format!(
                "{source}:{}: expected 'key = value', got '{raw}'",
                lineno + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn parse_config_file(path: &Path) -> Result<Pairs, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text, &path.display().to_string())
}

pub fn parse_set_overrides(sets: &[String]) -> Result<Pairs, CliError> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    CliError::config(format!("--set expects KEY=VALUE, got '{s}'"))
                })
        })
        .collect()
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("{key}: expected a real number, got '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse::<usize>()
        .map_err(|_| CliError::config(format!("{key}: expected a non-negative integer, got '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(CliError::config(format!(
            "{key}: expected true or false, got '{value}'"
        ))),
    }
}

/// Resolve an ordered pair list (file order, then overrides) into a full
/// config. `env_id` selects the per-environment defaults; unknown keys are
/// rejected with the list of valid keys.
pub fn build_config(pairs: &Pairs) -> Result<TrainConfig, CliError> {
    for (key, _) in pairs {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "unknown config key '{key}'; valid keys: {}",
                CONFIG_KEYS.join(", ")
            )));
        }
    }
    let env_id = pairs
        .iter()
        .rev()
        .find(|(k, _)| k == "env_id")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| CliError::config("config must set env_id"))?;
    let mut config = TrainConfig::defaults_for(&env_id).map_err(CliError::from)?;
    for (key, value) in pairs {
        apply_key(&mut config, key, value)?;
    }
    config.validate().map_err(CliError::from)?;
    Ok(config)
}

fn apply_key(config: &mut TrainConfig, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "env_id" => config.env_id = value.to_string(),
        "symmetry_mode" => config.symmetry_mode = SymmetryMode::from_name(value)?,
        "mirror_weight" => config.mirror_weight = parse_f64(key, value)?,
        "gamma" => config.gamma = parse_f64(key, value)?,
        "lam" => config.lam = parse_f64(key, value)?,
        "clip_eps" => config.clip_eps = parse_f64(key, value)?,
        "lr" => config.lr = parse_f64(key, value)?,
        "entropy_coef" => config.entropy_coef = parse_f64(key, value)?,
        "value_coef" => config.value_coef = parse_f64(key, value)?,
        "epochs_per_iter" => config.epochs_per_iter = parse_usize(key, value)?,
        "minibatch_size" => config.minibatch_size = parse_usize(key, value)?,
        "num_envs" => config.num_envs = parse_usize(key, value)?,
        "horizon" => config.horizon = parse_usize(key, value)?,
        "total_iters" => config.total_iters = parse_usize(key, value)?,
        "init_scale" => config.init_scale = parse_f64(key, value)?,
        "seed" => {
            config.seed = value.parse::<u64>().map_err(|_| {
                CliError::config(format!("seed: expected an unsigned integer, got '{value}'"))
            })?
        }
        "naive_aug_ablation" => config.naive_aug_ablation = parse_bool(key, value)?,
        "hidden" => {
            config.hidden = value
                .split(',')
                .map(|p| parse_usize(key, p.trim()))
                .collect::<Result<Vec<_>, _>>()?
        }
        "activation" => config.activation = Activation::from_name(value)?,
        _ => unreachable!("keys validated in build_config"),
    }
    Ok(())
}

/// Full resolved snapshot, suitable for writing back out as a config.
pub fn config_to_pairs(config: &TrainConfig) -> Pairs {
    let hidden = config
        .hidden
        .iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>()
        .join(",");
    vec![
        ("env_id".into(), config.env_id.clone()),
        ("symmetry_mode".into(), config.symmetry_mode.name().into()),
        ("mirror_weight".into(), config.mirror_weight.to_string()),
        ("gamma".into(), config.gamma.to_string()),
        ("lam".into(), config.lam.to_string()),
        ("clip_eps".into(), config.clip_eps.to_string()),
        ("lr".into(), config.lr.to_string()),
        ("entropy_coef".into(), config.entropy_coef.to_string()),
        ("value_coef".into(), config.value_coef.to_string()),
        ("epochs_per_iter".into(), config.epochs_per_iter.to_string()),
        ("minibatch_size".into(), config.minibatch_size.to_string()),
        ("num_envs".into(), config.num_envs.to_string()),
        ("horizon".into(), config.horizon.to_string()),
        ("total_iters".into(), config.total_iters.to_string()),
        ("init_scale".into(), config.init_scale.to_string()),
        ("seed".into(), config.seed.to_string()),
        ("naive_aug_ablation".into(), config.naive_aug_ablation.to_string()),
        ("hidden".into(), hidden),
        ("activation".into(), config.activation.name().into()),
    ]
}

/// Short method label used for default run names and compare legends,
/// e.g. `none`, `aug`, `loss-4`, `both-1`, `aug-naive`.
pub fn method_label(config: &TrainConfig) -> String {
    let mut label = match config.symmetry_mode {
        SymmetryMode::None => "none".to_string(),
        SymmetryMode::Aug => "aug".to_string(),
        SymmetryMode::Loss => format!("loss-{}", trim_float(config.mirror_weight)),
        SymmetryMode::Both => format!("both-{}", trim_float(config.mirror_weight)),
    };
    if config.naive_aug_ablation {
        label.push_str("-naive");
    }
    label
}

fn trim_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

pub const MANIFEST_FILE: &str = "manifest.cfg";

/// Write the manifest before training begins: resolved config plus metadata
/// comments. Re-reading it as a config reproduces the run.
pub fn write_manifest(dir: &Path, config: &TrainConfig) -> Result<(), CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "# symmrl run manifest");
    let _ = writeln!(text, "# code_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# output_dir = {}", dir.display());
    let _ = writeln!(text, "# started_at_unix = {}", unix_now());
    for (key, value) in config_to_pairs(config) {
        let _ = writeln!(text, "{key} = {value}");
    }
    std::fs::write(dir.join(MANIFEST_FILE), text)
        .map_err(|e| CliError::failure(format!("cannot write manifest: {e}")))
}

/// Append the end-of-run timestamp (as a comment, keeping the manifest a
/// valid config).
pub fn finish_manifest(dir: &Path) -> Result<(), CliError> {
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new()
        .append(true)
        .open(dir.join(MANIFEST_FILE))
        .map_err(|e| CliError::failure(format!("cannot append to manifest: {e}")))?;
    writeln!(file, "# finished_at_unix = {}", unix_now())
        .map_err(|e| CliError::failure(format!("cannot append to manifest: {e}")))
}

pub fn read_manifest(dir: &Path) -> Result<TrainConfig, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let pairs = parse_config_file(&path)?;
    build_config(&pairs)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
