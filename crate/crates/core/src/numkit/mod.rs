//! Dense numeric kernels: a small feed-forward network with hand-coded
//! backpropagation, Adam, uniform initialization with a configurable scale,
//! a diagonal-Gaussian distribution head, and a central-difference gradient
//! checker.
//!
//! Everything here is a pure function of its arguments (including RNG
//! state); there is no global state and no hidden accumulation.

mod adam;
mod gaussian;
mod gradcheck;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use gaussian::{
    gaussian_entropy, gaussian_logp, gaussian_logp_grad_log_std, gaussian_logp_grad_mean,
    gaussian_sample, GaussianPolicy, LOG_STD_MAX, LOG_STD_MIN,
};
pub use gradcheck::{gradient_check, ScalarLoss};
pub use mlp::{Activation, FwdScratch, Mlp};

/// Max-norm of a slice.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// True if every entry is finite.
pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
