//! Trajectory collection, generalized advantage estimation, and symmetry
//! augmentation of rollout buffers.
//!
//! Augmentation appends, for every collected transition and every
//! non-identity transform, a copy with transformed observation and action
//! while the stored log-probability, advantage, return target, value, reward,
//! and done flag are **copied unchanged** from the source. The copied
//! log-probability is what makes the importance ratio of augmented samples
//! use the original sample's action probability in the denominator; the
//! copied advantage realizes the equivalence of advantages along an orbit.
//! Augmentation runs strictly after GAE, so advantages come only from
//! genuinely collected states.

use crate::error::{Error, Result};
use crate::numkit::{all_finite, GaussianPolicy};
use crate::rng::{rng_stream, stream};
use crate::symmdp::{Env, SymmetryGroup};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;

/// One stored transition.
#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Vec<f64>,
    /// As sampled, unclamped — so `logp_old` is exact. Environments clamp
    /// internally when stepping.
    pub action: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// Rollout policy's log-probability at `(obs, action)` at collection
    /// time; for augmented transitions, copied bitwise from the source.
    pub logp_old: f64,
    pub value_old: f64,
    pub advantage: f64,
    pub return_target: f64,
    /// 0 for collected transitions, `i` for copies produced by transform `g_i`.
    pub group_tag: usize,
}

/// Flat transition store, grouped by `(env index, time)`, with per-env
/// bootstrap observations and the returns of episodes completed during the
/// collection window.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    pub transitions: Vec<Transition>,
    pub num_envs: usize,
    pub horizon: usize,
    final_next_obs: Vec<Vec<f64>>,
    final_done: Vec<bool>,
    pub completed_returns: Vec<f64>,
    original_len: usize,
    orbit_size: usize,
    gae_done: bool,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Number of collected (non-augmented) transitions.
    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// Group size N after augmentation; 1 before.
    pub fn orbit_size(&self) -> usize {
        self.orbit_size
    }

    pub fn gae_computed(&self) -> bool {
        self.gae_done
    }

    /// Index of orbit member `i` (transform index) of original transition `k`.
    pub fn orbit_member(&self, i: usize, k: usize) -> usize {
        debug_assert!(i < self.orbit_size && k < self.original_len);
        i * self.original_len + k
    }

    /// Observations of the original transitions only.
    pub fn original_observations(&self) -> impl Iterator<Item = &[f64]> {
        self.transitions[..self.original_len]
            .iter()
            .map(|t| t.obs.as_slice())
    }

    /// Assemble a buffer from externally produced transitions (grouped by
    /// `(env index, time)`), e.g. for oracles and synthetic tests.
    /// `final_next_obs` / `final_done` provide the per-env bootstrap points.
    pub fn from_parts(
        transitions: Vec<Transition>,
        num_envs: usize,
        horizon: usize,
        final_next_obs: Vec<Vec<f64>>,
        final_done: Vec<bool>,
    ) -> Result<RolloutBuffer> {
        if transitions.len() != num_envs * horizon {
            return Err(Error::config(format!(
                "expected {num_envs} x {horizon} transitions, got {}",
                transitions.len()
            )));
        }
        if final_next_obs.len() != num_envs || final_done.len() != num_envs {
            return Err(Error::config(
                "final_next_obs and final_done must have one entry per env",
            ));
        }
        let original_len = transitions.len();
        Ok(RolloutBuffer {
            transitions,
            num_envs,
            horizon,
            final_next_obs,
            final_done,
            completed_returns: vec![],
            original_len,
            orbit_size: 1,
            gae_done: false,
        })
    }

    /// Mean stored log-probability over augmented transitions (the
    /// denominators the update rule will use); `NaN` when nothing is
    /// augmented.
    pub fn mean_aug_logp_old(&self) -> f64 {
        let aug = &self.transitions[self.original_len..];
        if aug.is_empty() {
            return f64::NAN;
        }
        aug.iter().map(|t| t.logp_old).sum::<f64>() / aug.len() as f64
    }
}

/// One environment instance plus the state that persists across collection
/// windows (current observation, episode return accumulator, RNG stream).
pub struct EnvWorker {
    pub env: Box<dyn Env>,
    rng: ChaCha8Rng,
    obs: Vec<f64>,
    ep_return: f64,
}

impl EnvWorker {
    pub fn new(mut env: Box<dyn Env>, seed: u64, index: usize) -> Self {
        let mut rng = rng_stream(seed, stream::ENV_BASE + index as u64);
        let obs = env.reset(&mut rng);
        EnvWorker {
            env,
            rng,
            obs,
            ep_return: 0.0,
        }
    }
}

/// Roll the policy for `horizon` steps in every worker (workers advance in
/// fixed `(env index, time)` order, so results are scheduling-independent).
/// Episodes auto-reset on done; log-probabilities are evaluated at the
/// unclamped sampled action.
pub fn collect(
    workers: &mut [EnvWorker],
    policy: &GaussianPolicy,
    horizon: usize,
    mut action_rng: &mut dyn RngCore,
) -> Result<RolloutBuffer> {
    if workers.is_empty() || horizon == 0 {
        return Err(Error::config("collect needs num_envs >= 1 and horizon >= 1"));
    }
    let num_envs = workers.len();
    let mut transitions = Vec::with_capacity(num_envs * horizon);
    let mut final_next_obs = Vec::with_capacity(num_envs);
    let mut final_done = Vec::with_capacity(num_envs);
    let mut completed_returns = Vec::new();

    for (e, worker) in workers.iter_mut().enumerate() {
        let mut last_done = false;
        for _ in 0..horizon {
            let (action, logp_old) = policy.sample(&worker.obs, &mut action_rng);
            if !all_finite(&action) {
                return Err(Error::numeric(format!(
                    "env {e}: non-finite sampled action {action:?}"
                )));
            }
            let step = worker.env.step(&action).map_err(|err| match err {
                Error::Config(m) => Error::Config(format!("env {e}: {m}")),
                Error::Numeric(m) => Error::Numeric(format!("env {e}: {m}")),
                Error::Input(m) => Error::Input(format!("env {e}: {m}")),
                Error::UnsupportedEnv(m) => Error::UnsupportedEnv(format!("env {e}: {m}")),
            })?;
            worker.ep_return += step.reward;
            transitions.push(Transition {
                obs: std::mem::take(&mut worker.obs),
                action,
                reward: step.reward,
                done: step.done,
                logp_old,
                value_old: 0.0,
                advantage: 0.0,
                return_target: 0.0,
                group_tag: 0,
            });
            last_done = step.done;
            if step.done {
                completed_returns.push(worker.ep_return);
                worker.ep_return = 0.0;
                worker.obs = worker.env.reset(&mut worker.rng);
            } else {
                worker.obs = step.next_obs;
            }
        }
        final_next_obs.push(worker.obs.clone());
        final_done.push(last_done);
    }

    let original_len = transitions.len();
    Ok(RolloutBuffer {
        transitions,
        num_envs,
        horizon,
        final_next_obs,
        final_done,
        completed_returns,
        original_len,
        orbit_size: 1,
        gae_done: false,
    })
}

/// Fill values, advantages (`A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}`
/// with `delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t)`), and return
/// targets `A_t + V(s_t)`. Bootstraps from `values_fn` at each env's final
/// next observation, zero if that env finished an episode on its last step.
pub fn compute_gae(
    buffer: &mut RolloutBuffer,
    values_fn: &dyn Fn(&[f64]) -> f64,
    gamma: f64,
    lam: f64,
) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&lam) {
        return Err(Error::config(format!(
            "gamma and lambda must lie in [0, 1], got gamma={gamma} lambda={lam}"
        )));
    }
    if buffer.orbit_size != 1 {
        return Err(Error::config("GAE must run before augmentation"));
    }
    for t in &mut buffer.transitions {
        t.value_old = values_fn(&t.obs);
    }
    let horizon = buffer.horizon;
    for e in 0..buffer.num_envs {
        let seg = e * horizon;
        let bootstrap = if buffer.final_done[e] {
            0.0
        } else {
            values_fn(&buffer.final_next_obs[e])
        };
        let mut next_adv = 0.0;
        for t in (0..horizon).rev() {
            let idx = seg + t;
            let mask = if buffer.transitions[idx].done { 0.0 } else { 1.0 };
            let next_value = if t + 1 == horizon {
                bootstrap
            } else {
                buffer.transitions[idx + 1].value_old
            };
            let tr = &mut buffer.transitions[idx];
            let delta = tr.reward + gamma * next_value * mask - tr.value_old;
            next_adv = delta + gamma * lam * mask * next_adv;
            tr.advantage = next_adv;
            tr.return_target = next_adv + tr.value_old;
        }
    }
    buffer.gae_done = true;
    Ok(())
}

/// Append the group orbit of every transition: transform `g_i` (i >= 1)
/// contributes a copy with `obs' = L_i obs`, `action' = K_i action`, and all
/// scalar fields copied bitwise from the source. Requires GAE already
/// computed on the original buffer.
pub fn augment(mut buffer: RolloutBuffer, group: &SymmetryGroup) -> Result<RolloutBuffer> {
    if !buffer.gae_done {
        return Err(Error::config(
            "augment requires advantages and return targets to be computed first",
        ));
    }
    if buffer.orbit_size != 1 {
        return Err(Error::config("buffer is already augmented"));
    }
    let obs_dim = buffer.transitions.first().map(|t| t.obs.len()).unwrap_or(0);
    let act_dim = buffer
        .transitions
        .first()
        .map(|t| t.action.len())
        .unwrap_or(0);
    if group.obs_dim() != obs_dim || group.act_dim() != act_dim {
        return Err(Error::config(format!(
            "group dims ({}, {}) do not match buffer dims ({obs_dim}, {act_dim})",
            group.obs_dim(),
            group.act_dim()
        )));
    }
    let n = group.len();
    let orig = buffer.original_len;
    buffer.transitions.reserve((n - 1) * orig);
    for (i, transform) in group.transforms().iter().enumerate().skip(1) {
        for k in 0..orig {
            let src = &buffer.transitions[k];
            let copy = Transition {
                obs: transform.state_map.apply_unchecked(&src.obs),
                action: transform.action_map.apply_unchecked(&src.action),
                reward: src.reward,
                done: src.done,
                logp_old: src.logp_old,
                value_old: src.value_old,
                advantage: src.advantage,
                return_target: src.return_target,
                group_tag: i,
            };
            buffer.transitions.push(copy);
        }
    }
    buffer.orbit_size = n;
    Ok(buffer)
}

/// Zero-mean unit-std advantages over the whole (possibly augmented) buffer.
/// Orbit members share one advantage value, so within-orbit equality is
/// preserved bitwise.
pub fn normalize_advantages(buffer: &mut RolloutBuffer) {
    let n = buffer.transitions.len();
    if n == 0 {
        return;
    }
    let mean = buffer.transitions.iter().map(|t| t.advantage).sum::<f64>() / n as f64;
    let var = buffer
        .transitions
        .iter()
        .map(|t| (t.advantage - mean) * (t.advantage - mean))
        .sum::<f64>()
        / n as f64;
    let std = var.sqrt().max(1e-8);
    for t in &mut buffer.transitions {
        t.advantage = (t.advantage - mean) / std;
    }
}
