//! Continuous swing-up cart-pole.
//!
//! A velocity-commanded cart with a first-order lag drives a frictionless
//! pendulum. The action is the desired cart velocity; the reward is the
//! negative absolute pole angle (zero when upright). Episodes start with the
//! pole hanging on a random side and end only at the horizon.
//!
//! The observation is `(v, theta, theta_dot)` — the cart position is
//! internal state only and the remaining coordinates evolve independently of
//! it, which is what makes the 2-fold sign symmetry exact.

use super::{cartpole_group, cos_even, sin_odd, wrap_angle, CARTPOLE_ID};
use crate::error::{Error, Result};
use crate::numkit::all_finite;
use crate::symmdp::{Env, EnvSpec, StepResult};
use rand::{Rng, RngCore};
use std::f64::consts::PI;

pub const DT: f64 = 0.02;
pub const CMD_LAG: f64 = 0.1;
pub const GRAVITY: f64 = 9.81;
pub const POLE_LEN: f64 = 0.6;
pub const V_MAX: f64 = 3.0;
pub const HORIZON: usize = 200;
/// Reset angle offset is drawn from `Uniform(0, RESET_NOISE)`, keeping
/// trajectories off the angle-wrap branch point.
pub const RESET_NOISE: f64 = 0.05;

pub struct CartPole {
    spec: EnvSpec,
    x: f64,
    v: f64,
    theta: f64,
    theta_dot: f64,
    t: usize,
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl CartPole {
    pub fn new() -> Self {
        CartPole {
            spec: EnvSpec {
                id: CARTPOLE_ID.to_string(),
                obs_dim: 3,
                act_dim: 1,
                action_low: vec![-V_MAX],
                action_high: vec![V_MAX],
                horizon: HORIZON,
                group: cartpole_group(),
            },
            x: 0.0,
            v: 0.0,
            theta: PI,
            theta_dot: 0.0,
            t: 0,
        }
    }

    fn obs(&self) -> Vec<f64> {
        vec![self.v, self.theta, self.theta_dot]
    }
}

impl Env for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let side = if rng.random_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 };
        let offset: f64 = rng.random_range(0.0..RESET_NOISE);
        self.x = 0.0;
        self.v = 0.0;
        self.theta = side * (PI - offset);
        self.theta_dot = 0.0;
        self.t = 0;
        self.obs()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if action.len() != 1 {
            return Err(Error::config(format!(
                "cartpole expects a 1-dim action, got {}",
                action.len()
            )));
        }
        if !all_finite(action) {
            return Err(Error::input(format!("non-finite action {action:?}")));
        }
        let a = action[0].clamp(-V_MAX, V_MAX);
        // first-order lag toward the commanded velocity
        let u = (a - self.v) / CMD_LAG;
        let theta_ddot = (GRAVITY * sin_odd(self.theta) - u * cos_even(self.theta)) / POLE_LEN;
        // semi-implicit Euler: velocities first, then positions
        self.v += DT * u;
        self.x += DT * self.v;
        self.theta_dot += DT * theta_ddot;
        self.theta = wrap_angle(self.theta + DT * self.theta_dot);
        self.t += 1;
        Ok(StepResult {
            next_obs: self.obs(),
            reward: -self.theta.abs(),
            done: self.t >= HORIZON,
        })
    }

    fn set_state(&mut self, obs: &[f64]) -> Result<()> {
        if obs.len() != 3 {
            return Err(Error::config(format!(
                "cartpole state takes a 3-dim observation, got {}",
                obs.len()
            )));
        }
        if !all_finite(obs) {
            return Err(Error::input(format!("non-finite state {obs:?}")));
        }
        self.x = 0.0;
        self.v = obs[0];
        self.theta = wrap_angle(obs[1]);
        self.theta_dot = obs[2];
        self.t = 0;
        Ok(())
    }

    fn base_condition(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        // pole hanging on the right; the group orbit adds the left start
        let offset: f64 = rng.random_range(0.0..RESET_NOISE);
        vec![0.0, PI - offset, 0.0]
    }

    fn verifier_admissible(&self, obs: &[f64]) -> bool {
        obs[1].abs() <= PI - 1e-6
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_stream, stream};

    #[test]
    fn reset_is_deterministic_per_seed() {
        let mut env = CartPole::new();
        let a = env.reset(&mut rng_stream(3, stream::ENV_BASE));
        let b = env.reset(&mut rng_stream(3, stream::ENV_BASE));
        assert_eq!(a, b);
    }

    #[test]
    fn reset_sides_are_balanced() {
        let mut env = CartPole::new();
        let mut rng = rng_stream(0, stream::ENV_BASE);
        let n = 10_000;
        let mut right = 0usize;
        for _ in 0..n {
            let obs = env.reset(&mut rng);
            assert!(obs[1].abs() > PI - RESET_NOISE && obs[1].abs() <= PI);
            if obs[1] > 0.0 {
                right += 1;
            }
        }
        let frac = right as f64 / n as f64;
        assert!((0.45..=0.55).contains(&frac), "right fraction {frac}");
    }

    #[test]
    fn first_step_reward_is_near_minus_pi() {
        let mut env = CartPole::new();
        env.reset(&mut rng_stream(1, stream::ENV_BASE));
        let r = env.step(&[0.0]).unwrap().reward;
        assert!((r - (-PI)).abs() < 0.1, "reward {r}");
    }

    #[test]
    fn upright_rest_is_an_equilibrium() {
        let mut env = CartPole::new();
        env.set_state(&[0.0, 0.0, 0.0]).unwrap();
        let step = env.step(&[0.0]).unwrap();
        assert_eq!(step.next_obs, vec![0.0, 0.0, 0.0]);
        assert_eq!(step.reward, 0.0);
    }

    #[test]
    fn hanging_rest_is_an_unstable_equilibrium() {
        let mut env = CartPole::new();
        env.set_state(&[0.0, PI, 0.0]).unwrap();
        let step = env.step(&[0.0]).unwrap();
        assert_eq!(step.next_obs[1], PI);
        assert_eq!(step.reward, -PI);
    }

    #[test]
    fn dynamics_are_exactly_odd() {
        let mut env = CartPole::new();
        let mut rng = rng_stream(17, stream::ENV_BASE);
        for _ in 0..200 {
            let s: Vec<f64> = vec![
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-8.0..8.0),
            ];
            let a = rng.random_range(-4.0..4.0);
            env.set_state(&s).unwrap();
            let base = env.step(&[a]).unwrap();
            let neg: Vec<f64> = s.iter().map(|x| -x).collect();
            env.set_state(&neg).unwrap();
            let mirrored = env.step(&[-a]).unwrap();
            for (m, b) in mirrored.next_obs.iter().zip(base.next_obs.iter()) {
                assert_eq!(m.to_bits(), (-b).to_bits(), "state {s:?} action {a}");
            }
            assert_eq!(mirrored.reward.to_bits(), base.reward.to_bits());
            assert_eq!(mirrored.done, base.done);
        }
    }

    #[test]
    fn done_fires_exactly_at_horizon() {
        let mut env = CartPole::new();
        env.reset(&mut rng_stream(0, stream::ENV_BASE));
        for t in 1..=HORIZON {
            let step = env.step(&[0.5]).unwrap();
            assert_eq!(step.done, t == HORIZON);
        }
    }

    #[test]
    fn theta_stays_wrapped_and_returns_bounded() {
        let mut env = CartPole::new();
        let mut rng = rng_stream(5, stream::ENV_BASE);
        env.reset(&mut rng);
        let mut ep_return = 0.0;
        for _ in 0..HORIZON {
            let a = rng.random_range(-V_MAX..V_MAX);
            let step = env.step(&[a]).unwrap();
            assert!(step.next_obs[1] > -PI && step.next_obs[1] <= PI);
            ep_return += step.reward;
        }
        assert!(ep_return <= 0.0 && ep_return >= -(HORIZON as f64) * PI);
    }

    #[test]
    fn non_finite_action_is_an_input_error() {
        let mut env = CartPole::new();
        env.reset(&mut rng_stream(0, stream::ENV_BASE));
        assert!(matches!(
            env.step(&[f64::NAN]),
            Err(Error::Input(_))
        ));
    }
}
