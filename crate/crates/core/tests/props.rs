//! Property tests: GAE against a direct-sum oracle, augmentation copy
//! semantics, angle wrapping, and Gaussian log-density symmetry.

use proptest::prelude::*;
use symmrl::envs::{planar_group, wrap_angle};
use symmrl::numkit::gaussian_logp;
use symmrl::rollout::{augment, compute_gae, normalize_advantages, RolloutBuffer, Transition};

fn synthetic_transition(obs: Vec<f64>, reward: f64, done: bool) -> Transition {
    Transition {
        obs,
        action: vec![0.0],
        reward,
        done,
        logp_old: 0.0,
        value_old: 0.0,
        advantage: 0.0,
        return_target: 0.0,
        group_tag: 0,
    }
}

/// Direct evaluation of `A_t = sum_l delta_{t+l} * prod_{m<l} gamma lambda (1 - done_{t+m})`.
fn gae_direct_sum(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lam: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let next_value = |t: usize| -> f64 {
        if dones[t] {
            0.0
        } else if t + 1 == n {
            bootstrap
        } else {
            values[t + 1]
        }
    };
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            let mut factor = 1.0;
            for l in t..n {
                let delta = rewards[l] + gamma * next_value(l) - values[l];
                acc += factor * delta;
                if dones[l] {
                    break;
                }
                factor *= gamma * lam;
            }
            acc
        })
        .collect()
}

proptest! {
    #[test]
    fn gae_recursion_matches_direct_sum(
        steps in prop::collection::vec(
            (-1.0f64..1.0, -1.0f64..1.0, prop::bool::weighted(0.2)), 1..=10),
        bootstrap in -1.0f64..1.0,
        gamma in 0.0f64..=1.0,
        lam in 0.0f64..=1.0,
    ) {
        let rewards: Vec<f64> = steps.iter().map(|s| s.0).collect();
        let values: Vec<f64> = steps.iter().map(|s| s.1).collect();
        let dones: Vec<bool> = steps.iter().map(|s| s.2).collect();
        // stash each step's value in its observation so values_fn can return it
        let transitions: Vec<Transition> = steps
            .iter()
            .map(|&(r, v, d)| synthetic_transition(vec![v], r, d))
            .collect();
        let n = transitions.len();
        let mut buffer = RolloutBuffer::from_parts(
            transitions, 1, n, vec![vec![bootstrap]], vec![dones[n - 1]],
        ).unwrap();
        compute_gae(&mut buffer, &|obs| obs[0], gamma, lam).unwrap();
        let expected = gae_direct_sum(&rewards, &values, &dones, bootstrap, gamma, lam);
        for (t, e) in buffer.transitions.iter().zip(expected.iter()) {
            prop_assert!((t.advantage - e).abs() < 1e-10,
                "recursive {} vs direct {}", t.advantage, e);
            prop_assert!((t.return_target - (e + t.value_old)).abs() < 1e-12);
        }
    }

    #[test]
    fn augmentation_copies_orbit_scalars_bitwise(
        rows in prop::collection::vec(
            (prop::collection::vec(-5.0f64..5.0, 6),
             prop::collection::vec(-2.0f64..2.0, 2),
             -1.0f64..1.0, -8.0f64..0.0), 1..=20),
    ) {
        let n = rows.len();
        let transitions: Vec<Transition> = rows
            .iter()
            .map(|(obs, action, reward, logp)| Transition {
                obs: obs.clone(),
                action: action.clone(),
                reward: *reward,
                done: false,
                logp_old: *logp,
                value_old: 0.0,
                advantage: 0.0,
                return_target: 0.0,
                group_tag: 0,
            })
            .collect();
        let mut buffer = RolloutBuffer::from_parts(
            transitions, 1, n, vec![vec![0.0; 6]], vec![false],
        ).unwrap();
        compute_gae(&mut buffer, &|obs| 0.25 * obs[0] - 0.1 * obs[3], 0.97, 0.9).unwrap();
        let group = planar_group();
        let mut buffer = augment(buffer, &group).unwrap();
        prop_assert_eq!(buffer.len(), group.len() * n);
        normalize_advantages(&mut buffer);
        for k in 0..n {
            let src = &buffer.transitions[buffer.orbit_member(0, k)];
            for i in 1..group.len() {
                let copy = &buffer.transitions[buffer.orbit_member(i, k)];
                prop_assert_eq!(copy.group_tag, i);
                prop_assert_eq!(copy.advantage.to_bits(), src.advantage.to_bits());
                prop_assert_eq!(copy.return_target.to_bits(), src.return_target.to_bits());
                prop_assert_eq!(copy.logp_old.to_bits(), src.logp_old.to_bits());
                prop_assert_eq!(copy.value_old.to_bits(), src.value_old.to_bits());
                prop_assert_eq!(copy.reward.to_bits(), src.reward.to_bits());
                // the observation is the transform applied to the source
                let expected = group.transform(i).apply_state(&src.obs).unwrap();
                prop_assert_eq!(&copy.obs, &expected);
            }
        }
    }

    #[test]
    fn wrap_angle_is_in_range_and_odd(theta in -50.0f64..50.0) {
        let w = wrap_angle(theta);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        let wn = wrap_angle(-theta);
        if w != std::f64::consts::PI {
            prop_assert_eq!(wn.to_bits(), (-w).to_bits());
        }
    }

    #[test]
    fn gaussian_logp_is_flip_invariant(
        m in prop::collection::vec(-3.0f64..3.0, 2),
        ls in prop::collection::vec(-2.0f64..1.0, 2),
        a in prop::collection::vec(-4.0f64..4.0, 2),
    ) {
        let neg_m: Vec<f64> = m.iter().map(|x| -x).collect();
        let neg_a: Vec<f64> = a.iter().map(|x| -x).collect();
        let lp = gaussian_logp(&m, &ls, &a);
        let lp_flip = gaussian_logp(&neg_m, &ls, &neg_a);
        prop_assert_eq!(lp.to_bits(), lp_flip.to_bits());
    }
}
