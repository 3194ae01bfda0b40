//! The PPO update with four symmetry modes: `none`, `loss` (mirror loss),
//! `aug` (symmetry augmentation with the corrected update rule), and `both`.
//!
//! The corrected rule is realized entirely through buffer semantics: the
//! ratio of an augmented sample pairs the current policy's log-probability at
//! the transformed `(state, action)` with the **original** sample's stored
//! log-probability, because augmentation copies `logp_old` unchanged. The
//! `naive` ablation overwrites those denominators with the rollout policy's
//! probability at the transformed pairs, which is the unstable baseline.
//!
//! Minibatches are formed by shuffling *orbits* (a collected transition plus
//! all of its transformed copies stay together). Every transition still
//! appears exactly once per epoch with equal weight; keeping orbits adjacent
//! makes the accumulated gradient exactly symmetric when the policy is
//! exactly equivariant, so an equivariant initialization stays equivariant.

mod trainer;

pub use trainer::{MetricsRecord, Trainer};

use crate::error::{Error, Result};
use crate::numkit::{
    adam_step, gaussian_entropy, gaussian_logp, gaussian_logp_grad_log_std,
    gaussian_logp_grad_mean, AdamState, Activation, GaussianPolicy, Mlp,
};
use crate::rollout::{RolloutBuffer, Transition};
use crate::symmdp::SymmetryGroup;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Which symmetry mechanisms participate in the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryMode {
    None,
    Loss,
    Aug,
    Both,
}

impl SymmetryMode {
    pub fn uses_augmentation(self) -> bool {
        matches!(self, SymmetryMode::Aug | SymmetryMode::Both)
    }

    pub fn uses_mirror_loss(self) -> bool {
        matches!(self, SymmetryMode::Loss | SymmetryMode::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryMode::None => "none",
            SymmetryMode::Loss => "loss",
            SymmetryMode::Aug => "aug",
            SymmetryMode::Both => "both",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(SymmetryMode::None),
            "loss" => Ok(SymmetryMode::Loss),
            "aug" => Ok(SymmetryMode::Aug),
            "both" => Ok(SymmetryMode::Both),
            other => Err(Error::config(format!(
                "unknown symmetry_mode '{other}' (expected none, loss, aug, both)"
            ))),
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub env_id: String,
    pub symmetry_mode: SymmetryMode,
    pub mirror_weight: f64,
    pub gamma: f64,
    pub lam: f64,
    pub clip_eps: f64,
    pub lr: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub epochs_per_iter: usize,
    pub minibatch_size: usize,
    pub num_envs: usize,
    pub horizon: usize,
    pub total_iters: usize,
    pub init_scale: f64,
    pub seed: u64,
    pub naive_aug_ablation: bool,
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl TrainConfig {
    /// Per-environment defaults tuned for desk-scale convergence.
    pub fn defaults_for(env_id: &str) -> Result<Self> {
        let (entropy_coef, total_iters) = match env_id {
            crate::envs::CARTPOLE_ID => (0.0, 300),
            crate::envs::PLANAR_REACH_ID => (0.003, 500),
            other => {
                return Err(Error::config(format!(
                    "unknown environment '{other}' (expected one of {:?})",
                    crate::envs::env_ids()
                )))
            }
        };
        Ok(TrainConfig {
            env_id: env_id.to_string(),
            symmetry_mode: SymmetryMode::None,
            mirror_weight: 1.0,
            gamma: 0.99,
            lam: 0.95,
            clip_eps: 0.2,
            lr: 3e-4,
            entropy_coef,
            value_coef: 0.5,
            epochs_per_iter: 4,
            minibatch_size: 512,
            num_envs: 16,
            horizon: 128,
            total_iters,
            init_scale: 0.1,
            seed: 0,
            naive_aug_ablation: false,
            hidden: vec![64, 64],
            activation: Activation::Tanh,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(Error::config(format!(
                "clip_eps must lie in (0, 1), got {}",
                self.clip_eps
            )));
        }
        if !(self.mirror_weight >= 0.0) {
            return Err(Error::config(format!(
                "mirror_weight must be >= 0, got {}",
                self.mirror_weight
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.lam) {
            return Err(Error::config(
                "gamma and lam must lie in [0, 1]".to_string(),
            ));
        }
        if !(self.lr > 0.0) {
            return Err(Error::config(format!("lr must be > 0, got {}", self.lr)));
        }
        if !(self.init_scale >= 0.0) {
            return Err(Error::config(format!(
                "init_scale must be >= 0, got {}",
                self.init_scale
            )));
        }
        if self.epochs_per_iter == 0
            || self.minibatch_size == 0
            || self.num_envs == 0
            || self.horizon == 0
            || self.total_iters == 0
        {
            return Err(Error::config(
                "epochs_per_iter, minibatch_size, num_envs, horizon, and total_iters must be >= 1"
                    .to_string(),
            ));
        }
        if self.naive_aug_ablation && !self.symmetry_mode.uses_augmentation() {
            return Err(Error::config(
                "naive_aug_ablation requires symmetry_mode aug or both".to_string(),
            ));
        }
        Ok(())
    }
}

/// Per-epoch loss components. `total` always satisfies
/// `total = surrogate + value_coef * value_loss - entropy_coef * entropy + w * mirror`
/// with the exact coefficients in force for the run's mode.
#[derive(Debug, Clone, Copy)]
pub struct LossBreakdown {
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mirror: f64,
    pub total: f64,
    /// Mean stored denominator log-probability over augmented transitions:
    /// under the corrected rule these are the original samples' values; under
    /// the naive ablation they are re-evaluations at the transformed pairs.
    /// `NaN` when the buffer has no augmented transitions.
    pub mean_aug_logp: f64,
}

/// Negated clipped PPO objective on a batch:
/// `-mean(min(rho * A, clip(rho, 1 - eps, 1 + eps) * A))` with
/// `rho = exp(logp_new - logp_old)`.
pub fn ppo_surrogate(
    policy: &GaussianPolicy,
    batch: &[&Transition],
    clip_eps: f64,
) -> Result<f64> {
    let mut scratch = policy.mean_net.make_scratch();
    let mut objective = 0.0;
    for t in batch {
        policy.mean_net.forward_checked(&t.obs, &mut scratch)?;
        let logp_new = gaussian_logp(scratch.output(), policy.log_std(), &t.action);
        let rho = (logp_new - t.logp_old).exp();
        if !rho.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite ratio: logp_new = {logp_new}, logp_old = {}, gap = {}",
                t.logp_old,
                logp_new - t.logp_old
            )));
        }
        objective += clipped_objective(rho, t.advantage, clip_eps);
    }
    Ok(-objective / batch.len() as f64)
}

#[inline]
fn clipped_objective(rho: f64, adv: f64, clip_eps: f64) -> f64 {
    let surr1 = rho * adv;
    let surr2 = rho.clamp(1.0 - clip_eps, 1.0 + clip_eps) * adv;
    surr1.min(surr2)
}

/// Gradient of the clipped objective with respect to `logp_new`; zero when
/// clipping makes the sample inactive.
#[inline]
fn clipped_objective_dlogp(rho: f64, adv: f64, clip_eps: f64) -> f64 {
    let surr1 = rho * adv;
    let surr2 = rho.clamp(1.0 - clip_eps, 1.0 + clip_eps) * adv;
    if surr1 <= surr2 {
        rho * adv
    } else {
        0.0
    }
}

/// [`ppo_surrogate`] plus its gradient, accumulated (scaled by `scale`) into
/// `grads` laid out as `[mean net params, log_std]`.
pub fn ppo_surrogate_grad(
    policy: &GaussianPolicy,
    batch: &[&Transition],
    clip_eps: f64,
    scale: f64,
    grads: &mut [f64],
) -> Result<f64> {
    debug_assert_eq!(grads.len(), policy.param_count());
    let mlp_count = policy.mean_net.param_count();
    let act_dim = policy.act_dim();
    let mut scratch = policy.mean_net.make_scratch();
    let mut mean = vec![0.0; act_dim];
    let mut d_mean = vec![0.0; act_dim];
    let mut d_ls = vec![0.0; act_dim];
    let inv_n = 1.0 / batch.len() as f64;
    let mut objective = 0.0;
    for t in batch {
        policy.mean_net.forward_checked(&t.obs, &mut scratch)?;
        mean.copy_from_slice(scratch.output());
        let logp_new = gaussian_logp(&mean, policy.log_std(), &t.action);
        let rho = (logp_new - t.logp_old).exp();
        if !rho.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite ratio: logp_new = {logp_new}, logp_old = {}, gap = {}",
                t.logp_old,
                logp_new - t.logp_old
            )));
        }
        objective += clipped_objective(rho, t.advantage, clip_eps);
        // d(loss)/d(logp_new), already carrying the -1/n of the negated mean
        let coeff = -clipped_objective_dlogp(rho, t.advantage, clip_eps) * inv_n * scale;
        if coeff != 0.0 {
            gaussian_logp_grad_mean(&mean, policy.log_std(), &t.action, &mut d_mean);
            for d in &mut d_mean {
                *d *= coeff;
            }
            policy
                .mean_net
                .backward(&mut scratch, &d_mean, &mut grads[..mlp_count])?;
            gaussian_logp_grad_log_std(&mean, policy.log_std(), &t.action, &mut d_ls);
            for (g, d) in grads[mlp_count..].iter_mut().zip(d_ls.iter()) {
                *g += coeff * d;
            }
        }
    }
    Ok(-objective * inv_n)
}

/// Mean squared error between `V(obs)` and the stored return targets.
pub fn value_loss(value_net: &Mlp, batch: &[&Transition]) -> Result<f64> {
    let mut scratch = value_net.make_scratch();
    let mut sum = 0.0;
    for t in batch {
        value_net.forward_checked(&t.obs, &mut scratch)?;
        let err = scratch.output()[0] - t.return_target;
        sum += err * err;
    }
    Ok(sum / batch.len() as f64)
}

/// [`value_loss`] plus its gradient, accumulated (scaled by `scale`) into
/// `grads` (value net flat layout).
pub fn value_loss_grad(
    value_net: &Mlp,
    batch: &[&Transition],
    scale: f64,
    grads: &mut [f64],
) -> Result<f64> {
    let mut scratch = value_net.make_scratch();
    let inv_n = 1.0 / batch.len() as f64;
    let mut sum = 0.0;
    for t in batch {
        value_net.forward_checked(&t.obs, &mut scratch)?;
        let err = scratch.output()[0] - t.return_target;
        sum += err * err;
        let d_out = [2.0 * err * inv_n * scale];
        value_net.backward(&mut scratch, &d_out, grads)?;
    }
    Ok(sum * inv_n)
}

/// Mirror symmetry loss: mean over `states` and over **all** group elements
/// of `|| K_g mu(s) - mu(L_g s) ||^2`, where the transformed-output term
/// `K_g mu(s)` is treated as a label (not back-propagated through) and the
/// identity element contributes exactly zero.
pub fn mirror_loss(
    policy: &GaussianPolicy,
    states: &[&[f64]],
    group: &SymmetryGroup,
) -> Result<f64> {
    mirror_loss_impl(policy, states, group, 0.0, None)
}

/// [`mirror_loss`] plus its (detached) gradient, accumulated (scaled by
/// `scale`) into `grads` laid out as `[mean net params, log_std]`; the
/// log_std block is untouched.
pub fn mirror_loss_grad(
    policy: &GaussianPolicy,
    states: &[&[f64]],
    group: &SymmetryGroup,
    scale: f64,
    grads: &mut [f64],
) -> Result<f64> {
    mirror_loss_impl(policy, states, group, scale, Some(grads))
}

fn mirror_loss_impl(
    policy: &GaussianPolicy,
    states: &[&[f64]],
    group: &SymmetryGroup,
    scale: f64,
    mut grads: Option<&mut [f64]>,
) -> Result<f64> {
    if states.is_empty() {
        return Ok(0.0);
    }
    let n = group.len();
    let act_dim = policy.act_dim();
    let mlp_count = policy.mean_net.param_count();
    let inv = 1.0 / (states.len() * n) as f64;
    let mut scratch = policy.mean_net.make_scratch();
    let mut label = vec![0.0; act_dim];
    let mut d_out = vec![0.0; act_dim];
    let mut sum = 0.0;
    for s in states {
        policy.mean_net.forward_checked(s, &mut scratch)?;
        let mu = scratch.output().to_vec();
        for transform in group.transforms().iter().skip(1) {
            transform.action_map.apply_into(&mu, &mut label);
            let ls = transform.state_map.apply(s)?;
            policy.mean_net.forward_checked(&ls, &mut scratch)?;
            let y = scratch.output();
            let mut term = 0.0;
            for j in 0..act_dim {
                let diff = label[j] - y[j];
                term += diff * diff;
                d_out[j] = -2.0 * diff * inv * scale;
            }
            sum += term;
            if let Some(g) = grads.as_deref_mut() {
                policy
                    .mean_net
                    .backward(&mut scratch, &d_out, &mut g[..mlp_count])?;
            }
        }
    }
    Ok(sum * inv)
}

/// Replace the stored denominators of augmented transitions with the rollout
/// policy's log-probability at the transformed pairs — the naive baseline
/// whose arbitrarily small probabilities destabilize training. Originals are
/// untouched.
pub fn naive_augment_logp(policy_old: &GaussianPolicy, buffer: &mut RolloutBuffer) {
    let mut scratch = policy_old.mean_net.make_scratch();
    let orig = buffer.original_len();
    for t in buffer.transitions[orig..].iter_mut() {
        policy_old.mean_net.forward_into(&t.obs, &mut scratch);
        t.logp_old = gaussian_logp(scratch.output(), policy_old.log_std(), &t.action);
    }
}

/// One PPO update over the (possibly augmented) buffer: `epochs_per_iter`
/// epochs of orbit-shuffled minibatches, one Adam step per minibatch on the
/// policy and the value net. The mirror term is evaluated on the
/// original-state subset of each minibatch when the mode calls for it.
/// Returns one [`LossBreakdown`] per epoch (components averaged over
/// minibatches, `total` reassembled from the averages).
#[allow(clippy::too_many_arguments)]
pub fn update(
    policy: &mut GaussianPolicy,
    value_net: &mut Mlp,
    buffer: &RolloutBuffer,
    group: &SymmetryGroup,
    config: &TrainConfig,
    opt_policy: &mut AdamState,
    opt_value: &mut AdamState,
    shuffle_rng: &mut ChaCha8Rng,
) -> Result<Vec<LossBreakdown>> {
    if !buffer.gae_computed() {
        return Err(Error::config("update requires GAE to be computed"));
    }
    let orbit_size = buffer.orbit_size();
    let num_orbits = buffer.original_len();
    let orbits_per_mb = (config.minibatch_size / orbit_size).clamp(1, num_orbits);
    let num_mb = num_orbits / orbits_per_mb;
    let mirror_weight = if config.symmetry_mode.uses_mirror_loss() {
        config.mirror_weight
    } else {
        0.0
    };
    let mean_aug_logp = buffer.mean_aug_logp_old();

    let mut policy_grads = vec![0.0; policy.param_count()];
    let mut value_grads = vec![0.0; value_net.param_count()];
    let mut policy_params = vec![0.0; policy.param_count()];
    let mut value_params = vec![0.0; value_net.param_count()];
    let mut orbit_order: Vec<usize> = (0..num_orbits).collect();
    let mut batch: Vec<&Transition> = Vec::with_capacity(orbits_per_mb * orbit_size);
    let mut originals: Vec<&[f64]> = Vec::with_capacity(orbits_per_mb);
    let mut breakdowns = Vec::with_capacity(config.epochs_per_iter);

    for _epoch in 0..config.epochs_per_iter {
        orbit_order.shuffle(shuffle_rng);
        let (mut e_surr, mut e_vl, mut e_ent, mut e_mirror) = (0.0, 0.0, 0.0, 0.0);
        for mb in 0..num_mb {
            batch.clear();
            originals.clear();
            for &k in &orbit_order[mb * orbits_per_mb..(mb + 1) * orbits_per_mb] {
                for i in 0..orbit_size {
                    let t = &buffer.transitions[buffer.orbit_member(i, k)];
                    batch.push(t);
                    if t.group_tag == 0 {
                        originals.push(&t.obs);
                    }
                }
            }

            policy_grads.fill(0.0);
            value_grads.fill(0.0);
            let surrogate =
                ppo_surrogate_grad(policy, &batch, config.clip_eps, 1.0, &mut policy_grads)?;
            let vl = value_loss_grad(value_net, &batch, config.value_coef, &mut value_grads)?;
            let entropy = gaussian_entropy(policy.log_std());
            let mlp_count = policy.mean_net.param_count();
            for g in policy_grads[mlp_count..].iter_mut() {
                *g -= config.entropy_coef;
            }
            let mirror = if config.symmetry_mode.uses_mirror_loss() {
                mirror_loss_grad(policy, &originals, group, mirror_weight, &mut policy_grads)?
            } else {
                0.0
            };
            let total = surrogate + config.value_coef * vl - config.entropy_coef * entropy
                + mirror_weight * mirror;
            if !total.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite minibatch loss: surrogate={surrogate} value={vl} \
                     entropy={entropy} mirror={mirror}"
                )));
            }

            policy_params.clear();
            policy_params.extend_from_slice(&policy.flatten());
            adam_step(
                &mut policy_params,
                &policy_grads,
                opt_policy,
                config.lr,
                ADAM_BETA1,
                ADAM_BETA2,
                ADAM_EPS,
            )?;
            policy.load_flat(&policy_params)?;

            value_params.clear();
            value_params.extend_from_slice(&value_net.flatten());
            adam_step(
                &mut value_params,
                &value_grads,
                opt_value,
                config.lr,
                ADAM_BETA1,
                ADAM_BETA2,
                ADAM_EPS,
            )?;
            value_net.load_flat(&value_params)?;

            e_surr += surrogate;
            e_vl += vl;
            e_ent += entropy;
            e_mirror += mirror;
        }
        let inv = 1.0 / num_mb as f64;
        let (surrogate, value_l, entropy, mirror) =
            (e_surr * inv, e_vl * inv, e_ent * inv, e_mirror * inv);
        breakdowns.push(LossBreakdown {
            surrogate,
            value_loss: value_l,
            entropy,
            mirror,
            total: surrogate + config.value_coef * value_l - config.entropy_coef * entropy
                + mirror_weight * mirror,
            mean_aug_logp,
        });
    }
    Ok(breakdowns)
}
