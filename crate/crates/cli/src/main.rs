//! Experiment front door for training, evaluation, and symmetry
//! verification.
//!
//! Exit codes: 0 on success, 1 on check or numeric failures, 2 on
//! configuration errors.

mod commands;
mod config;
mod csvlog;
mod paramio;
mod plot;

use clap::{Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;

/// Command error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            message: msg.into(),
            exit_code: 2,
        }
    }
    /// A verification/assertion failed.
    pub fn check(msg: impl Into<String>) -> Self {
        CliError {
            message: msg.into(),
            exit_code: 1,
        }
    }
    /// Runtime failure (numeric error, I/O).
    pub fn failure(msg: impl Into<String>) -> Self {
        CliError {
            message: msg.into(),
            exit_code: 1,
        }
    }
    pub fn exit_code(&self) -> i32 {
        self.exit_code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<symmrl::Error> for CliError {
    fn from(err: symmrl::Error) -> Self {
        match err {
            symmrl::Error::Config(_) => CliError::config(err.to_string()),
            _ => CliError::failure(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "symmrl",
    version,
    about = "On-policy RL with symmetry invariance: PPO plus mirror loss and corrected symmetry augmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy from a config file
    Train {
        /// Flat `key = value` config file
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. --set symmetry_mode=aug (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (default <env>-<method>-s<seed> under
        /// $SYMMRL_OUT_ROOT)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress progress lines
        #[arg(long)]
        quiet: bool,
    },
    /// Equivalent-goal evaluation of a trained run
    Eval {
        /// Run directory containing manifest.cfg and policy.bin
        run_dir: PathBuf,
        /// Episodes per goal
        #[arg(long, default_value_t = 500)]
        n_runs: usize,
        /// Evaluation seed (default: the run's training seed)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify that an environment/group pair forms a symmetric MDP
    Verify {
        /// Environment id (cartpole or planar-reach)
        env_id: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Test hook: flip one sign in the given transform's state map
        #[arg(long)]
        corrupt_transform: Option<usize>,
    },
    /// Train the same seed with the corrected and the naive augmentation
    /// rule and emit the log-probability comparison
    AblateNaive {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Aggregate runs by method label and render overlay curves
    Compare {
        /// Run directories (must share an environment)
        run_dirs: Vec<PathBuf>,
        /// Output directory for compare.csv and compare.svg
        #[arg(long, default_value = "compare")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train {
            config,
            set,
            out,
            quiet,
        } => commands::train::cmd_train(&config, &set, out, quiet),
        Command::Eval {
            run_dir,
            n_runs,
            seed,
        } => commands::eval::cmd_eval(&run_dir, n_runs, seed),
        Command::Verify {
            env_id,
            tol,
            samples,
            seed,
            corrupt_transform,
        } => commands::verify::cmd_verify(&env_id, tol, samples, seed, corrupt_transform),
        Command::AblateNaive {
            config,
            set,
            out,
            quiet,
        } => commands::ablate::cmd_ablate_naive(&config, &set, out, quiet),
        Command::Compare { run_dirs, out } => commands::compare::cmd_compare(&run_dirs, &out),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
