//! On-policy reinforcement learning with symmetry invariance.
//!
//! PPO with a Gaussian policy, extended with two mechanisms for exploiting
//! task symmetry:
//!
//! - a **mirror loss** that penalizes the discrepancy between the transformed
//!   policy output and the policy output at the transformed state, and
//! - **symmetry data augmentation** with a corrected importance-sampling
//!   update rule that keeps the original samples' action probabilities in the
//!   ratio denominator instead of re-evaluating the rollout policy on
//!   transformed pairs.
//!
//! The crate is self-contained: dense MLP kernels with hand-coded
//! backpropagation live in [`numkit`], symmetry groups and the empirical
//! MDP-symmetry verifier in [`symmdp`], two built-in exactly-equivariant
//! environments in [`envs`], trajectory collection / GAE / augmentation in
//! [`rollout`], the PPO update with its four symmetry modes in [`learner`],
//! and measurement protocols in [`evalkit`].
//!
//! Everything is deterministic given a seed: training with the same
//! configuration twice produces identical parameter trajectories.

pub mod envs;
pub mod error;
pub mod evalkit;
pub mod learner;
pub mod numkit;
pub mod rng;
pub mod rollout;
pub mod symmdp;

pub use error::{Error, Result};
