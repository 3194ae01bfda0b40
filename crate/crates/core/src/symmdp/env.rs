//! Environment contract.

use crate::error::{Error, Result};
use crate::symmdp::SymmetryGroup;
use rand::RngCore;

/// One transition outcome.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub next_obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

/// Static description of an environment, including its symmetry group.
#[derive(Debug, Clone)]
pub struct EnvSpec {
    pub id: String,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub horizon: usize,
    pub group: SymmetryGroup,
}

impl EnvSpec {
    /// Structural invariants: positive horizon, elementwise `low < high`,
    /// dimensions consistent with the group, and the action box mapped onto
    /// itself by every `K_g`.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon must be >= 1"));
        }
        if self.action_low.len() != self.act_dim || self.action_high.len() != self.act_dim {
            return Err(Error::config("action bounds must match act_dim"));
        }
        for (lo, hi) in self.action_low.iter().zip(self.action_high.iter()) {
            if !(lo < hi) {
                return Err(Error::config(format!(
                    "action bounds must satisfy low < high, got [{lo}, {hi}]"
                )));
            }
        }
        if self.group.obs_dim() != self.obs_dim || self.group.act_dim() != self.act_dim {
            return Err(Error::config(format!(
                "group dims ({}, {}) do not match env dims ({}, {})",
                self.group.obs_dim(),
                self.group.act_dim(),
                self.obs_dim,
                self.act_dim
            )));
        }
        for t in self.group.transforms() {
            // interval image of the box under K_g, row by row
            for j in 0..self.act_dim {
                let (mut lo, mut hi) = (0.0, 0.0);
                for i in 0..self.act_dim {
                    let k = t.action_map.entry(j, i);
                    let (a, b) = (k * self.action_low[i], k * self.action_high[i]);
                    lo += a.min(b);
                    hi += a.max(b);
                }
                if (lo - self.action_low[j]).abs() > 1e-12 || (hi - self.action_high[j]).abs() > 1e-12
                {
                    return Err(Error::config(format!(
                        "action box is not invariant under transform '{}' (component {j})",
                        t.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Clamp an action to the box, elementwise.
    pub fn clamp_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(self.action_low.iter().zip(self.action_high.iter()))
            .map(|(a, (lo, hi))| a.clamp(*lo, *hi))
            .collect()
    }
}

/// A deterministic, resettable environment.
///
/// Instances are single-user mutable state; parallel collection uses one
/// instance per worker with an independent RNG stream.
pub trait Env {
    fn spec(&self) -> &EnvSpec;

    /// Start a new episode, returning the initial observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// Advance one step. Actions are clamped to the box internally.
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;

    /// Test/verifier hook: force the internal state to the one producing the
    /// given observation and restart the step counter. Environments without
    /// this capability return [`Error::UnsupportedEnv`].
    fn set_state(&mut self, obs: &[f64]) -> Result<()>;

    /// A canonical initial condition whose group orbit spans the equivalent
    /// goals of the task (e.g. pole to one fixed side, one goal position).
    fn base_condition(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// Whether an observation may be used as a verifier sample. Environments
    /// exclude measure-zero regions where exact equivariance breaks (e.g.
    /// angle-wrap branch points).
    fn verifier_admissible(&self, _obs: &[f64]) -> bool {
        true
    }
}
