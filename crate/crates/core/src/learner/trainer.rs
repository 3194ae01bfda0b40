//! The iteration driver: collect, GAE, (augment), update, measure.

use crate::error::{Error, Result};
use crate::evalkit::symmetry_metric;
use crate::learner::{naive_augment_logp, update, LossBreakdown, TrainConfig};
use crate::numkit::{AdamState, GaussianPolicy, Mlp};
use crate::rng::{rng_stream, stream};
use crate::rollout::{augment, collect, compute_gae, normalize_advantages, EnvWorker};
use crate::symmdp::SymmetryGroup;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// One per-iteration metrics row.
#[derive(Debug, Clone)]
pub struct MetricsRecord {
    pub iter: usize,
    /// Mean return of episodes completed during this iteration's collection;
    /// carries the previous value forward when none completed (NaN until the
    /// first episode ever finishes).
    pub mean_return: f64,
    /// Mirror-loss formula evaluated without gradients on this iteration's
    /// collected states, after the update.
    pub symmetry_metric: f64,
    pub mean_aug_logp: f64,
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mirror: f64,
    pub total: f64,
    pub wall_time_s: f64,
}

/// Owns the policy, value net, optimizers, and environment workers for one
/// training run. Fully deterministic given the config (seeded RNG streams,
/// fixed reduction order, single-threaded update path).
pub struct Trainer {
    config: TrainConfig,
    policy: GaussianPolicy,
    value_net: Mlp,
    opt_policy: AdamState,
    opt_value: AdamState,
    workers: Vec<EnvWorker>,
    group: SymmetryGroup,
    action_rng: ChaCha8Rng,
    shuffle_rng: ChaCha8Rng,
    iter: usize,
    last_mean_return: f64,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let probe = crate::envs::make_env(&config.env_id)?;
        let spec = probe.spec().clone();
        spec.validate()?;

        let mut policy_rng = rng_stream(config.seed, stream::POLICY_INIT);
        let policy = GaussianPolicy::uniform_init(
            spec.obs_dim,
            &config.hidden,
            spec.act_dim,
            config.activation,
            config.init_scale,
            &mut policy_rng,
        )?;

        let mut value_sizes = Vec::with_capacity(config.hidden.len() + 2);
        value_sizes.push(spec.obs_dim);
        value_sizes.extend_from_slice(&config.hidden);
        value_sizes.push(1);
        let mut value_rng = rng_stream(config.seed, stream::VALUE_INIT);
        let value_net = Mlp::uniform(
            &value_sizes,
            config.activation,
            config.init_scale,
            &mut value_rng,
        )?;

        let workers = (0..config.num_envs)
            .map(|i| {
                Ok(EnvWorker::new(
                    crate::envs::make_env(&config.env_id)?,
                    config.seed,
                    i,
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Trainer {
            opt_policy: AdamState::new(policy.param_count()),
            opt_value: AdamState::new(value_net.param_count()),
            action_rng: rng_stream(config.seed, stream::ACTIONS),
            shuffle_rng: rng_stream(config.seed, stream::SHUFFLE),
            group: spec.group,
            policy,
            value_net,
            workers,
            config,
            iter: 0,
            last_mean_return: f64::NAN,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn policy(&self) -> &GaussianPolicy {
        &self.policy
    }

    pub fn value_net(&self) -> &Mlp {
        &self.value_net
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn completed_iters(&self) -> usize {
        self.iter
    }

    /// One full iteration: collect -> GAE -> (augment) -> update. Numeric
    /// failures abort with the iteration index in the message.
    pub fn run_iteration(&mut self) -> Result<MetricsRecord> {
        let started = Instant::now();
        let iter = self.iter;
        let with_iter = |e: Error| match e {
            Error::Numeric(m) => Error::Numeric(format!("iteration {iter}: {m}")),
            other => other,
        };

        let mut buffer = collect(
            &mut self.workers,
            &self.policy,
            self.config.horizon,
            &mut self.action_rng,
        )
        .map_err(with_iter)?;
        if !buffer.completed_returns.is_empty() {
            self.last_mean_return = buffer.completed_returns.iter().sum::<f64>()
                / buffer.completed_returns.len() as f64;
        }

        let value_net = &self.value_net;
        compute_gae(
            &mut buffer,
            &|obs| value_net.forward(obs)[0],
            self.config.gamma,
            self.config.lam,
        )?;

        let mut buffer = if self.config.symmetry_mode.uses_augmentation() {
            augment(buffer, &self.group)?
        } else {
            buffer
        };
        if self.config.naive_aug_ablation {
            naive_augment_logp(&self.policy, &mut buffer);
        }
        normalize_advantages(&mut buffer);

        let mean_aug_logp = buffer.mean_aug_logp_old();
        if self.config.symmetry_mode.uses_augmentation() && !self.config.naive_aug_ablation {
            // corrected rule: the stored denominators of augmented samples are
            // the original samples' log probabilities
            let orig_mean = buffer.transitions[..buffer.original_len()]
                .iter()
                .map(|t| t.logp_old)
                .sum::<f64>()
                / buffer.original_len() as f64;
            debug_assert!(
                (mean_aug_logp - orig_mean).abs() <= 1e-9 * (1.0 + orig_mean.abs()),
                "corrected-rule denominator identity violated: {mean_aug_logp} vs {orig_mean}"
            );
        }

        let breakdowns = update(
            &mut self.policy,
            &mut self.value_net,
            &buffer,
            &self.group,
            &self.config,
            &mut self.opt_policy,
            &mut self.opt_value,
            &mut self.shuffle_rng,
        )
        .map_err(with_iter)?;
        let averaged = average_breakdowns(&breakdowns, &self.config);

        let states: Vec<&[f64]> = buffer.original_observations().collect();
        let metric = symmetry_metric(&self.policy, &states, &self.group);

        self.iter += 1;
        Ok(MetricsRecord {
            iter,
            mean_return: self.last_mean_return,
            symmetry_metric: metric,
            mean_aug_logp,
            surrogate: averaged.surrogate,
            value_loss: averaged.value_loss,
            entropy: averaged.entropy,
            mirror: averaged.mirror,
            total: averaged.total,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    }

    /// Run the configured number of iterations, invoking `on_record` after
    /// each one.
    pub fn run(&mut self, mut on_record: impl FnMut(&MetricsRecord)) -> Result<()> {
        while self.iter < self.config.total_iters {
            let record = self.run_iteration()?;
            on_record(&record);
        }
        Ok(())
    }
}

fn average_breakdowns(breakdowns: &[LossBreakdown], config: &TrainConfig) -> LossBreakdown {
    let n = breakdowns.len() as f64;
    let surrogate = breakdowns.iter().map(|b| b.surrogate).sum::<f64>() / n;
    let value_loss = breakdowns.iter().map(|b| b.value_loss).sum::<f64>() / n;
    let entropy = breakdowns.iter().map(|b| b.entropy).sum::<f64>() / n;
    let mirror = breakdowns.iter().map(|b| b.mirror).sum::<f64>() / n;
    let w = if config.symmetry_mode.uses_mirror_loss() {
        config.mirror_weight
    } else {
        0.0
    };
    LossBreakdown {
        surrogate,
        value_loss,
        entropy,
        mirror,
        total: surrogate + config.value_coef * value_loss - config.entropy_coef * entropy
            + w * mirror,
        mean_aug_logp: breakdowns.first().map(|b| b.mean_aug_logp).unwrap_or(f64::NAN),
    }
}
