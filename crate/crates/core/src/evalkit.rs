//! Measurement: the policy symmetry metric, the equivalent-goal return
//! protocol, and the initialization-scale study driver.

use crate::error::{Error, Result};
use crate::learner::{TrainConfig, Trainer};
use crate::numkit::GaussianPolicy;
use crate::rng::{rng_stream, stream};
use crate::rollout::{collect, EnvWorker};
use crate::symmdp::{Env, SymmetryGroup};
use rand::RngCore;

/// Mirror-loss formula evaluated without gradients: the mean over `states`
/// and over all group elements of `|| K_g mu(s) - mu(L_g s) ||^2` for the
/// deterministic policy output `mu`. A deliberately separate code path from
/// the training-time loss; the two agree to 1e-12 on identical inputs.
pub fn symmetry_metric(policy: &GaussianPolicy, states: &[&[f64]], group: &SymmetryGroup) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for s in states {
        let mu = policy.mean_action(s);
        for transform in group.transforms().iter().skip(1) {
            let label = transform.action_map.apply_unchecked(&mu);
            let ts = transform.state_map.apply_unchecked(s);
            let y = policy.mean_action(&ts);
            sum += label
                .iter()
                .zip(y.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    sum / (states.len() * group.len()) as f64
}

/// Per-goal mean returns over the orbit of a base condition, plus the
/// maximum pairwise difference between them.
#[derive(Debug, Clone)]
pub struct GoalEvalReport {
    pub goal_labels: Vec<String>,
    pub mean_returns: Vec<f64>,
    pub n_runs: usize,
    /// `max_{i,j} |mean_i - mean_j|`; for scalar means this equals max - min.
    pub variation: f64,
}

/// Evaluate a deterministic action rule on every goal in the orbit of the
/// environment's base condition: `n_runs` base conditions are drawn, each
/// transformed by every group element (paired design), and episodes are
/// rolled out with the given action function.
pub fn equivalent_goal_eval_with(
    env: &mut dyn Env,
    act: &dyn Fn(&[f64]) -> Vec<f64>,
    group: &SymmetryGroup,
    n_runs: usize,
    rng: &mut dyn RngCore,
) -> Result<GoalEvalReport> {
    if n_runs == 0 {
        return Err(Error::config("n_runs must be >= 1"));
    }
    let horizon = env.spec().horizon;
    let n_goals = group.len();
    let mut sums = vec![0.0; n_goals];
    for _ in 0..n_runs {
        let base = env.base_condition(rng);
        for (gi, transform) in group.transforms().iter().enumerate() {
            let start = transform.apply_state(&base)?;
            env.set_state(&start)?;
            let mut obs = start;
            let mut ep_return = 0.0;
            for _ in 0..horizon {
                let step = env.step(&act(&obs))?;
                ep_return += step.reward;
                if step.done {
                    break;
                }
                obs = step.next_obs;
            }
            sums[gi] += ep_return;
        }
    }
    let mean_returns: Vec<f64> = sums.iter().map(|s| s / n_runs as f64).collect();
    let mut variation = 0.0f64;
    for i in 0..n_goals {
        for j in i + 1..n_goals {
            variation = variation.max((mean_returns[i] - mean_returns[j]).abs());
        }
    }
    Ok(GoalEvalReport {
        goal_labels: group.transforms().iter().map(|t| t.name.clone()).collect(),
        mean_returns,
        n_runs,
        variation,
    })
}

/// [`equivalent_goal_eval_with`] for a Gaussian policy acting through its
/// mean (evaluation compares behaviors, so sampling noise is excluded).
pub fn equivalent_goal_eval(
    env: &mut dyn Env,
    policy: &GaussianPolicy,
    group: &SymmetryGroup,
    n_runs: usize,
    rng: &mut dyn RngCore,
) -> Result<GoalEvalReport> {
    equivalent_goal_eval_with(env, &|obs| policy.mean_action(obs), group, n_runs, rng)
}

/// One row of the initialization-scale study.
#[derive(Debug, Clone)]
pub struct ScaleStudyRow {
    pub scale: f64,
    pub seed: u64,
    pub initial_metric: f64,
    pub final_return: f64,
    pub final_metric: f64,
}

/// Symmetry metric of a policy on states from a fresh rollout of that same
/// policy (dedicated env workers and RNG streams, so training streams are
/// untouched).
pub fn fresh_rollout_symmetry_metric(
    policy: &GaussianPolicy,
    config: &TrainConfig,
    group: &SymmetryGroup,
) -> Result<f64> {
    let mut workers = (0..config.num_envs)
        .map(|i| {
            Ok(EnvWorker::new(
                crate::envs::make_env(&config.env_id)?,
                config.seed,
                config.num_envs + i,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut action_rng = rng_stream(config.seed, stream::EVAL);
    let buffer = collect(&mut workers, policy, config.horizon, &mut action_rng)?;
    let states: Vec<&[f64]> = buffer.original_observations().collect();
    Ok(symmetry_metric(policy, &states, group))
}

/// For every `(scale, seed)` pair: initialize with that scale, record the
/// symmetry metric before training, train to completion, and record the
/// final return and final metric. Scales must be non-negative and sorted
/// ascending.
pub fn init_scale_study(
    template: &TrainConfig,
    scales: &[f64],
    seeds: &[u64],
) -> Result<Vec<ScaleStudyRow>> {
    if scales.is_empty() || seeds.is_empty() {
        return Err(Error::config("scales and seeds must be non-empty"));
    }
    if scales.windows(2).any(|w| w[0] > w[1]) || scales.iter().any(|&s| s < 0.0) {
        return Err(Error::config(
            "scales must be non-negative and sorted ascending".to_string(),
        ));
    }
    let mut rows = Vec::with_capacity(scales.len() * seeds.len());
    for &scale in scales {
        for &seed in seeds {
            let mut config = template.clone();
            config.init_scale = scale;
            config.seed = seed;
            let label_err = |e: Error| {
                Error::Numeric(format!("scale {scale}, seed {seed}: {e}"))
            };
            let mut trainer = Trainer::new(config.clone()).map_err(label_err)?;
            let initial_metric =
                fresh_rollout_symmetry_metric(trainer.policy(), &config, trainer.group())
                    .map_err(label_err)?;
            let mut last: Option<crate::learner::MetricsRecord> = None;
            trainer
                .run(|record| last = Some(record.clone()))
                .map_err(label_err)?;
            let last = last.expect("total_iters >= 1");
            rows.push(ScaleStudyRow {
                scale,
                seed,
                initial_metric,
                final_return: last.mean_return,
                final_metric: last.symmetry_metric,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{cartpole_group, make_env, planar_group, CARTPOLE_ID, PLANAR_REACH_ID};
    use crate::learner::mirror_loss;
    use crate::numkit::{Activation, Mlp};
    use rand::Rng;

    fn constant_policy(bias: &[f64], obs_dim: usize) -> GaussianPolicy {
        let mut net = Mlp::zeros(&[obs_dim, bias.len()], Activation::Tanh).unwrap();
        {
            let (_, b) = net.layer_mut(0);
            b.copy_from_slice(bias);
        }
        GaussianPolicy::new(net, vec![0.0; bias.len()]).unwrap()
    }

    #[test]
    fn metric_agrees_with_the_training_loss_formula() {
        let mut rng = rng_stream(31, stream::POLICY_INIT);
        let policy =
            GaussianPolicy::uniform_init(3, &[12, 12], 1, Activation::Tanh, 0.5, &mut rng)
                .unwrap();
        let states_owned: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let states: Vec<&[f64]> = states_owned.iter().map(|s| s.as_slice()).collect();
        let group = cartpole_group();
        let metric = symmetry_metric(&policy, &states, &group);
        let loss = mirror_loss(&policy, &states, &group).unwrap();
        assert!((metric - loss).abs() <= 1e-12, "{metric} vs {loss}");
    }

    #[test]
    fn metric_of_constant_policy_matches_hand_algebra() {
        let bias = [0.25, -0.5];
        let policy = constant_policy(&bias, 6);
        let states_owned = [vec![0.1, 0.2, 0.0, 0.0, 1.0, -1.0]];
        let states: Vec<&[f64]> = states_owned.iter().map(|s| s.as_slice()).collect();
        // for the rotate-180 element the discrepancy is ||-b - b||^2 = 4||b||^2;
        // reflect-x and reflect-y each flip one action component: 4 b_x^2 / 4 b_y^2
        let b2: f64 = bias.iter().map(|b| b * b).sum();
        let expected =
            (4.0 * bias[0] * bias[0] + 4.0 * bias[1] * bias[1] + 4.0 * b2) / 4.0;
        let metric = symmetry_metric(&policy, &states, &planar_group());
        assert!((metric - expected).abs() < 1e-12, "{metric} vs {expected}");
    }

    #[test]
    fn metric_is_invariant_under_orbit_closed_relabeling() {
        let mut rng = rng_stream(33, stream::POLICY_INIT);
        let policy =
            GaussianPolicy::uniform_init(3, &[8], 1, Activation::Tanh, 0.4, &mut rng).unwrap();
        let group = cartpole_group();
        // orbit-closed state set: include both s and -s for every s
        let mut states_owned: Vec<Vec<f64>> = Vec::new();
        for _ in 0..15 {
            let s: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            states_owned.push(s.iter().map(|x| -x).collect());
            states_owned.push(s);
        }
        let states: Vec<&[f64]> = states_owned.iter().map(|s| s.as_slice()).collect();
        let relabeled_owned: Vec<Vec<f64>> = states_owned
            .iter()
            .map(|s| group.transform(1).apply_state(s).unwrap())
            .collect();
        let relabeled: Vec<&[f64]> = relabeled_owned.iter().map(|s| s.as_slice()).collect();
        let a = symmetry_metric(&policy, &states, &group);
        let b = symmetry_metric(&policy, &relabeled, &group);
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    /// Evaluation-time group symmetrizer: averages `K_g^-1 mu(L_g s)` over the
    /// group, with terms summed in a canonical order keyed by the transformed
    /// state so the result is bitwise equivariant. Test fixture only.
    fn symmetrized_action<'p>(
        policy: &'p GaussianPolicy,
        group: &'p SymmetryGroup,
    ) -> impl Fn(&[f64]) -> Vec<f64> + 'p {
        move |obs: &[f64]| {
            let mut terms: Vec<(Vec<f64>, Vec<f64>)> = group
                .transforms()
                .iter()
                .map(|t| {
                    let ts = t.state_map.apply_unchecked(obs);
                    let y = policy.mean_action(&ts);
                    let back = t.action_map.transpose().apply_unchecked(&y);
                    (ts, back)
                })
                .collect();
            terms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let n = group.len() as f64;
            let mut acc = vec![0.0; policy.act_dim()];
            for (_, term) in &terms {
                for (a, x) in acc.iter_mut().zip(term.iter()) {
                    *a += x;
                }
            }
            for a in &mut acc {
                *a /= n;
            }
            acc
        }
    }

    #[test]
    fn symmetrized_policy_has_zero_variation() {
        for (env_id, group) in [
            (CARTPOLE_ID, cartpole_group()),
            (PLANAR_REACH_ID, planar_group()),
        ] {
            let mut env = make_env(env_id).unwrap();
            let mut rng = rng_stream(41, stream::POLICY_INIT);
            let policy = GaussianPolicy::uniform_init(
                env.spec().obs_dim,
                &[16],
                env.spec().act_dim,
                Activation::Tanh,
                0.5,
                &mut rng,
            )
            .unwrap();
            let act = symmetrized_action(&policy, &group);
            let mut eval_rng = rng_stream(41, stream::EVAL);
            let report =
                equivalent_goal_eval_with(env.as_mut(), &act, &group, 3, &mut eval_rng).unwrap();
            assert_eq!(report.variation, 0.0, "{env_id}: {:?}", report.mean_returns);
        }
    }

    #[test]
    fn single_run_variation_is_the_exact_return_gap() {
        let mut env = make_env(CARTPOLE_ID).unwrap();
        let group = cartpole_group();
        let mut rng = rng_stream(43, stream::POLICY_INIT);
        let policy =
            GaussianPolicy::uniform_init(3, &[8], 1, Activation::Tanh, 0.6, &mut rng).unwrap();
        let mut eval_rng = rng_stream(43, stream::EVAL);
        let report = equivalent_goal_eval(env.as_mut(), &policy, &group, 1, &mut eval_rng).unwrap();
        assert_eq!(report.mean_returns.len(), 2);
        let gap = (report.mean_returns[0] - report.mean_returns[1]).abs();
        assert_eq!(report.variation, gap);

        let mut eval_rng = rng_stream(43, stream::EVAL);
        let again = equivalent_goal_eval(env.as_mut(), &policy, &group, 1, &mut eval_rng).unwrap();
        assert_eq!(report.mean_returns, again.mean_returns);
    }

    fn tiny_template() -> TrainConfig {
        let mut config = TrainConfig::defaults_for(CARTPOLE_ID).unwrap();
        config.num_envs = 2;
        config.horizon = 16;
        config.minibatch_size = 16;
        config.epochs_per_iter = 1;
        config.total_iters = 1;
        config.hidden = vec![8];
        config
    }

    #[test]
    fn scale_zero_gives_exactly_zero_initial_metric() {
        let rows = init_scale_study(&tiny_template(), &[0.0], &[0, 1]).unwrap();
        for row in &rows {
            assert_eq!(row.initial_metric, 0.0);
        }
    }

    #[test]
    fn identical_scale_and_seed_give_identical_rows() {
        let a = init_scale_study(&tiny_template(), &[0.3], &[5]).unwrap();
        let b = init_scale_study(&tiny_template(), &[0.3], &[5]).unwrap();
        assert_eq!(a[0].initial_metric.to_bits(), b[0].initial_metric.to_bits());
        assert_eq!(a[0].final_metric.to_bits(), b[0].final_metric.to_bits());
        assert_eq!(a[0].final_return.to_bits(), b[0].final_return.to_bits());
    }

    #[test]
    fn study_rejects_unsorted_scales() {
        assert!(init_scale_study(&tiny_template(), &[0.3, 0.1], &[0]).is_err());
    }
}
