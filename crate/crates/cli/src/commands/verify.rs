//! `verify`: structural group checks plus the empirical MDP-symmetry check,
//! printed as human-readable text and a machine-readable key-value block.

use crate::CliError;
use symmrl::envs::make_env;
use symmrl::rng::{rng_stream, stream};
use symmrl::symmdp::verify_mdp_symmetry;

pub fn cmd_verify(
    env_id: &str,
    tol: f64,
    samples: usize,
    seed: u64,
    corrupt_transform: Option<usize>,
) -> Result<(), CliError> {
    let mut env = make_env(env_id)?;
    let mut group = env.spec().group.clone();
    if let Some(i) = corrupt_transform {
        if i >= group.len() {
            return Err(CliError::config(format!(
                "--corrupt-transform {i} out of range (group has {} transforms)",
                group.len()
            )));
        }
        // test hook: flip one sign in the transform's state map
        let entry = group.transforms_mut()[i].state_map.entry_mut(0, 0);
        *entry = -*entry;
        eprintln!("note: corrupted transform {i} (flipped state_map[0][0])");
    }

    let group_report = group.verify(tol.max(1e-12));
    println!("group checks for '{env_id}':");
    for check in &group_report.checks {
        println!(
            "  {:<24} {}  ({})",
            check.name,
            if check.pass { "pass" } else { "FAIL" },
            check.detail
        );
    }

    let mut rng = rng_stream(seed, stream::VERIFIER);
    let mdp_report = verify_mdp_symmetry(env.as_mut(), &group, samples, tol, &mut rng)?;
    println!(
        "mdp symmetry over {} samples (tol {:e}):",
        mdp_report.num_samples, mdp_report.tol
    );
    for t in &mdp_report.per_transform {
        println!(
            "  {:<12} reward violation {:.3e}  dynamics violation {:.3e}  done mismatches {}",
            t.name, t.max_reward_violation, t.max_dynamics_violation, t.done_mismatches
        );
    }

    let pass = group_report.pass() && mdp_report.pass();
    // machine-readable block
    println!("---");
    for check in &group_report.checks {
        println!("check.{} = {}", check.name, if check.pass { "pass" } else { "fail" });
    }
    for t in &mdp_report.per_transform {
        println!("transform.{}.max_reward_violation = {}", t.name, t.max_reward_violation);
        println!(
            "transform.{}.max_dynamics_violation = {}",
            t.name, t.max_dynamics_violation
        );
        println!("transform.{}.done_mismatches = {}", t.name, t.done_mismatches);
    }
    println!("max_violation = {}", mdp_report.max_violation());
    println!("result = {}", if pass { "pass" } else { "fail" });

    if pass {
        Ok(())
    } else {
        Err(CliError::check(format!(
            "symmetry verification failed for '{env_id}' (max violation {:.3e})",
            mdp_report.max_violation()
        )))
    }
}
