//! `eval`: the equivalent-goal protocol on a trained run.

use crate::config::read_manifest;
use crate::paramio::{load_policy, POLICY_FILE};
use crate::CliError;
use std::fmt::Write as _;
use std::path::Path;
use symmrl::envs::make_env;
use symmrl::evalkit::equivalent_goal_eval;
use symmrl::rng::{rng_stream, stream};

pub const EVAL_FILE: &str = "eval.csv";

pub fn cmd_eval(run_dir: &Path, n_runs: usize, seed: Option<u64>) -> Result<(), CliError> {
    let config = read_manifest(run_dir)?;
    let policy = load_policy(&run_dir.join(POLICY_FILE))?;
    let mut env = make_env(&config.env_id)?;
    let group = env.spec().group.clone();
    if policy.obs_dim() != env.spec().obs_dim || policy.act_dim() != env.spec().act_dim {
        return Err(CliError::config(format!(
            "policy dims ({}, {}) do not match env '{}'",
            policy.obs_dim(),
            policy.act_dim(),
            config.env_id
        )));
    }
    let seed = seed.unwrap_or(config.seed);
    let mut rng = rng_stream(seed, stream::EVAL);
    let report = equivalent_goal_eval(env.as_mut(), &policy, &group, n_runs, &mut rng)?;

    let mut csv = String::from("goal,mean_return\n");
    println!(
        "equivalent-goal evaluation of {} ({} runs per goal, deterministic actions)",
        run_dir.display(),
        n_runs
    );
    for (label, mean) in report.goal_labels.iter().zip(report.mean_returns.iter()) {
        println!("  goal {label:<12} mean return {mean:.6}");
        let _ = writeln!(csv, "{label},{mean}");
    }
    let _ = writeln!(csv, "variation,{}", report.variation);
    println!("  variation (max pairwise difference): {:.6}", report.variation);
    std::fs::write(run_dir.join(EVAL_FILE), csv)
        .map_err(|e| CliError::failure(format!("cannot write eval.csv: {e}")))?;
    Ok(())
}
