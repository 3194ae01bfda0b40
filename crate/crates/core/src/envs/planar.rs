//! Planar point-mass goal-reaching with a 4-fold symmetry group.
//!
//! A point mass accelerates toward a goal sampled on a ring; the reward is
//! the negative distance to the goal scaled by the timestep. Reflections and
//! the 180-degree rotation act componentwise (signed permutations), and every
//! dynamics primitive — drag, speed clamp, arena clamp, distance — commutes
//! with them exactly.

use super::{planar_group, PLANAR_REACH_ID};
use crate::error::{Error, Result};
use crate::numkit::all_finite;
use crate::symmdp::{Env, EnvSpec, StepResult};
use rand::{Rng, RngCore};
use std::f64::consts::PI;

pub const DT: f64 = 0.05;
pub const DRAG: f64 = 0.1;
pub const SPEED_MAX: f64 = 2.0;
pub const ARENA_HALF: f64 = 4.0;
pub const GOAL_RADIUS: f64 = 2.0;
pub const HORIZON: usize = 150;

pub struct PlanarReach {
    spec: EnvSpec,
    p: [f64; 2],
    vel: [f64; 2],
    goal: [f64; 2],
    t: usize,
}

impl Default for PlanarReach {
    fn default() -> Self {
        Self::new()
    }
}

impl PlanarReach {
    pub fn new() -> Self {
        PlanarReach {
            spec: EnvSpec {
                id: PLANAR_REACH_ID.to_string(),
                obs_dim: 6,
                act_dim: 2,
                action_low: vec![-1.0, -1.0],
                action_high: vec![1.0, 1.0],
                horizon: HORIZON,
                group: planar_group(),
            },
            p: [0.0; 2],
            vel: [0.0; 2],
            goal: [GOAL_RADIUS, 0.0],
            t: 0,
        }
    }

    fn obs(&self) -> Vec<f64> {
        vec![
            self.p[0], self.p[1], self.vel[0], self.vel[1], self.goal[0], self.goal[1],
        ]
    }

    fn dist_to_goal(&self) -> f64 {
        let dx = self.p[0] - self.goal[0];
        let dy = self.p[1] - self.goal[1];
        (dx * dx + dy * dy).sqrt()
    }
}

impl Env for PlanarReach {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        self.goal = [GOAL_RADIUS * phi.cos(), GOAL_RADIUS * phi.sin()];
        self.p = [0.0; 2];
        self.vel = [0.0; 2];
        self.t = 0;
        self.obs()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if action.len() != 2 {
            return Err(Error::config(format!(
                "planar-reach expects a 2-dim action, got {}",
                action.len()
            )));
        }
        if !all_finite(action) {
            return Err(Error::input(format!("non-finite action {action:?}")));
        }
        for i in 0..2 {
            let a = action[i].clamp(-1.0, 1.0);
            self.vel[i] += DT * (a - DRAG * self.vel[i]);
        }
        let speed = (self.vel[0] * self.vel[0] + self.vel[1] * self.vel[1]).sqrt();
        if speed > SPEED_MAX {
            let scale = SPEED_MAX / speed;
            self.vel[0] *= scale;
            self.vel[1] *= scale;
        }
        for i in 0..2 {
            self.p[i] = (self.p[i] + DT * self.vel[i]).clamp(-ARENA_HALF, ARENA_HALF);
        }
        self.t += 1;
        Ok(StepResult {
            next_obs: self.obs(),
            reward: -self.dist_to_goal() * DT,
            done: self.t >= HORIZON,
        })
    }

    fn set_state(&mut self, obs: &[f64]) -> Result<()> {
        if obs.len() != 6 {
            return Err(Error::config(format!(
                "planar-reach state takes a 6-dim observation, got {}",
                obs.len()
            )));
        }
        if !all_finite(obs) {
            return Err(Error::input(format!("non-finite state {obs:?}")));
        }
        self.p = [obs[0], obs[1]];
        self.vel = [obs[2], obs[3]];
        self.goal = [obs[4], obs[5]];
        self.t = 0;
        Ok(())
    }

    fn base_condition(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        // goal in the open first quadrant; the orbit gives the 4 equivalent goals
        let phi: f64 = rng.random_range(0.0..PI / 2.0);
        vec![
            0.0,
            0.0,
            0.0,
            0.0,
            GOAL_RADIUS * phi.cos(),
            GOAL_RADIUS * phi.sin(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::planar_group;
    use crate::rng::{rng_stream, stream};

    #[test]
    fn resting_at_origin_pays_the_ring_radius() {
        let mut env = PlanarReach::new();
        env.reset(&mut rng_stream(4, stream::ENV_BASE));
        for _ in 0..10 {
            let step = env.step(&[0.0, 0.0]).unwrap();
            assert_eq!(step.next_obs[0], 0.0);
            assert_eq!(step.next_obs[1], 0.0);
            assert!((step.reward - (-GOAL_RADIUS * DT)).abs() < 1e-12);
        }
    }

    #[test]
    fn rotate_180_paired_trajectories_have_identical_rewards() {
        let group = planar_group();
        let rot = group.transform(3);
        let mut env_a = PlanarReach::new();
        let mut env_b = PlanarReach::new();
        let mut rng = rng_stream(9, stream::ENV_BASE);
        let start = env_a.reset(&mut rng);
        env_b.set_state(&rot.apply_state(&start).unwrap()).unwrap();
        for _ in 0..HORIZON {
            let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let ra = env_a.step(&a).unwrap();
            let rb = env_b.step(&rot.apply_action(&a).unwrap()).unwrap();
            assert_eq!(ra.reward.to_bits(), rb.reward.to_bits());
            assert_eq!(ra.done, rb.done);
        }
    }

    #[test]
    fn goal_sits_on_the_ring() {
        let mut env = PlanarReach::new();
        let mut rng = rng_stream(2, stream::ENV_BASE);
        for _ in 0..100 {
            let obs = env.reset(&mut rng);
            let r = (obs[4] * obs[4] + obs[5] * obs[5]).sqrt();
            assert!((r - GOAL_RADIUS).abs() < 1e-12);
        }
    }

    #[test]
    fn returns_are_bounded_by_arena_geometry() {
        let mut env = PlanarReach::new();
        let mut rng = rng_stream(6, stream::ENV_BASE);
        env.reset(&mut rng);
        let mut ep_return = 0.0;
        for _ in 0..HORIZON {
            let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let step = env.step(&a).unwrap();
            assert!(step.next_obs[0].abs() <= ARENA_HALF);
            assert!(step.next_obs[1].abs() <= ARENA_HALF);
            ep_return += step.reward;
        }
        let bound = 2.0 * ARENA_HALF * HORIZON as f64 * DT;
        assert!(ep_return <= 0.0 && ep_return >= -bound, "return {ep_return}");
    }
}
