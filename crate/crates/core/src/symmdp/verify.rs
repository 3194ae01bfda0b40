//! Empirical check that reward and dynamics are invariant under a group.

use crate::error::{Error, Result};
use crate::numkit::inf_norm;
use crate::symmdp::{Env, SymmetryGroup};
use rand::{Rng, RngCore};

/// Worst observed violations for one transform.
#[derive(Debug, Clone)]
pub struct TransformViolation {
    pub name: String,
    pub max_reward_violation: f64,
    pub max_dynamics_violation: f64,
    pub done_mismatches: usize,
}

impl TransformViolation {
    pub fn pass(&self, tol: f64) -> bool {
        self.max_reward_violation <= tol
            && self.max_dynamics_violation <= tol
            && self.done_mismatches == 0
    }
}

/// Outcome of [`verify_mdp_symmetry`].
#[derive(Debug, Clone)]
pub struct MdpSymmetryReport {
    pub env_id: String,
    pub num_samples: usize,
    pub tol: f64,
    pub per_transform: Vec<TransformViolation>,
}

impl MdpSymmetryReport {
    pub fn pass(&self) -> bool {
        self.per_transform.iter().all(|t| t.pass(self.tol))
    }

    /// Largest violation of any kind across transforms.
    pub fn max_violation(&self) -> f64 {
        self.per_transform
            .iter()
            .fold(0.0, |m, t| m.max(t.max_reward_violation).max(t.max_dynamics_violation))
    }
}

/// Samples `num_samples` reachable `(s, a)` pairs — states from random-policy
/// rollouts, actions uniform in the action box — and asserts, for every
/// non-identity transform `g`, that
///
/// - `|r(L_g s, K_g a) - r(s, a)| <= tol`,
/// - `max-norm(step(L_g s, K_g a).next_obs - L_g step(s, a).next_obs) <= tol`,
/// - the done flags agree.
///
/// The environment must be deterministic given state and action, and must
/// support `set_state`.
pub fn verify_mdp_symmetry(
    env: &mut dyn Env,
    group: &SymmetryGroup,
    num_samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<MdpSymmetryReport> {
    if num_samples == 0 {
        return Err(Error::config("num_samples must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::config("tol must be > 0"));
    }
    let spec = env.spec().clone();
    if group.obs_dim() != spec.obs_dim || group.act_dim() != spec.act_dim {
        return Err(Error::config(format!(
            "group dims ({}, {}) do not match env '{}' dims ({}, {})",
            group.obs_dim(),
            group.act_dim(),
            spec.id,
            spec.obs_dim,
            spec.act_dim
        )));
    }

    // Reachable-state sampling: random-policy rollouts, auto-reset on done.
    let mut states = Vec::with_capacity(num_samples);
    let mut actions = Vec::with_capacity(num_samples);
    let random_action = |rng: &mut dyn RngCore| -> Vec<f64> {
        spec.action_low
            .iter()
            .zip(spec.action_high.iter())
            .map(|(lo, hi)| rng.random_range(*lo..*hi))
            .collect()
    };
    let mut obs = env.reset(rng);
    while states.len() < num_samples {
        if env.verifier_admissible(&obs) {
            states.push(obs.clone());
            actions.push(random_action(rng));
        }
        let a = random_action(rng);
        let step = env.step(&a)?;
        obs = if step.done { env.reset(rng) } else { step.next_obs };
    }

    let mut per_transform: Vec<TransformViolation> = group
        .transforms()
        .iter()
        .skip(1)
        .map(|t| TransformViolation {
            name: t.name.clone(),
            max_reward_violation: 0.0,
            max_dynamics_violation: 0.0,
            done_mismatches: 0,
        })
        .collect();

    let mut diff = vec![0.0; spec.obs_dim];
    for (s, a) in states.iter().zip(actions.iter()) {
        env.set_state(s)?;
        let base = env.step(a)?;
        for (gi, t) in group.transforms().iter().enumerate().skip(1) {
            let ts = t.apply_state(s)?;
            let ta = t.apply_action(a)?;
            env.set_state(&ts)?;
            let got = env.step(&ta)?;
            let expected_next = t.apply_state(&base.next_obs)?;
            for (d, (x, y)) in diff
                .iter_mut()
                .zip(got.next_obs.iter().zip(expected_next.iter()))
            {
                *d = x - y;
            }
            let v = &mut per_transform[gi - 1];
            v.max_reward_violation = v.max_reward_violation.max((got.reward - base.reward).abs());
            v.max_dynamics_violation = v.max_dynamics_violation.max(inf_norm(&diff));
            if got.done != base.done {
                v.done_mismatches += 1;
            }
        }
    }

    Ok(MdpSymmetryReport {
        env_id: spec.id,
        num_samples,
        tol,
        per_transform,
    })
}
