//! Adam over flat parameter vectors.

use crate::error::{Error, Result};

/// First/second moment accumulators plus step counter.
///
/// Accumulators are zero at construction; `t` increments by exactly one per
/// [`adam_step`].
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// One bias-corrected Adam update, in place:
/// `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.len() {
        return Err(Error::config(format!(
            "adam shape mismatch: params {}, grads {}, state {}",
            params.len(),
            grads.len(),
            state.len()
        )));
    }
    if !(lr > 0.0) {
        return Err(Error::config(format!("adam lr must be > 0, got {lr}")));
    }
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut params = vec![1.0, -2.0, 0.5];
        let before = params.clone();
        let mut state = AdamState::new(3);
        adam_step(&mut params, &[0.0; 3], &mut state, 1e-3, 0.9, 0.999, 1e-8).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_with_unit_gradient_is_a_sign_step() {
        // at t = 1: m_hat = g, v_hat = g^2, update = lr * g / (|g| + eps) ~ lr
        let lr = 0.05;
        let mut params = vec![2.0];
        let mut state = AdamState::new(1);
        adam_step(&mut params, &[1.0], &mut state, lr, 0.9, 0.999, 1e-8).unwrap();
        let delta = 2.0 - params[0];
        assert!((delta - lr).abs() < lr * 1e-6, "delta {delta}");
    }

    #[test]
    fn identical_inputs_give_identical_outputs() {
        let grads = vec![0.3, -0.8];
        let run = || {
            let mut params = vec![1.0, 1.0];
            let mut state = AdamState::new(2);
            for _ in 0..5 {
                adam_step(&mut params, &grads, &mut state, 1e-2, 0.9, 0.999, 1e-8).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_a_config_error() {
        let mut params = vec![0.0; 2];
        let mut state = AdamState::new(3);
        let err = adam_step(&mut params, &[0.0; 2], &mut state, 1e-3, 0.9, 0.999, 1e-8);
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
