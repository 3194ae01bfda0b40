//! Diagonal-Gaussian distribution head and the Gaussian policy.

use crate::error::{Error, Result};
use crate::numkit::{Activation, Mlp};
use rand::Rng;
use rand_distr::StandardNormal;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const LN_2PI: f64 = 1.8378770664093453;

/// Log density of a diagonal Gaussian.
///
/// Even under joint sign flips: `gaussian_logp(-m, ls, -a) == gaussian_logp(m, ls, a)`
/// bitwise, since only `(a - m)^2` enters.
pub fn gaussian_logp(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    debug_assert_eq!(mean.len(), log_std.len());
    debug_assert_eq!(mean.len(), action.len());
    let mut lp = -0.5 * LN_2PI * mean.len() as f64;
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) * (-log_std[i]).exp();
        lp -= 0.5 * z * z + log_std[i];
    }
    lp
}

/// d logp / d mean_i = (a_i - m_i) / sigma_i^2.
pub fn gaussian_logp_grad_mean(mean: &[f64], log_std: &[f64], action: &[f64], out: &mut [f64]) {
    for i in 0..mean.len() {
        let inv_var = (-2.0 * log_std[i]).exp();
        out[i] = (action[i] - mean[i]) * inv_var;
    }
}

/// d logp / d log_std_i = ((a_i - m_i) / sigma_i)^2 - 1.
pub fn gaussian_logp_grad_log_std(mean: &[f64], log_std: &[f64], action: &[f64], out: &mut [f64]) {
    for i in 0..mean.len() {
        let z = (action[i] - mean[i]) * (-log_std[i]).exp();
        out[i] = z * z - 1.0;
    }
}

/// Reparameterized sample `mean + sigma * z`, `z ~ N(0, I)`.
pub fn gaussian_sample(mean: &[f64], log_std: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    mean.iter()
        .zip(log_std.iter())
        .map(|(m, ls)| {
            let z: f64 = rng.sample(StandardNormal);
            m + ls.exp() * z
        })
        .collect()
}

/// Entropy of a diagonal Gaussian: `sum(log_std) + d/2 * (1 + ln 2 pi)`.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().sum::<f64>() + 0.5 * (1.0 + LN_2PI) * log_std.len() as f64
}

/// MLP mean network plus a state-independent log standard deviation.
#[derive(Debug, Clone)]
pub struct GaussianPolicy {
    pub mean_net: Mlp,
    log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new(mean_net: Mlp, log_std: Vec<f64>) -> Result<Self> {
        if log_std.len() != mean_net.output_dim() {
            return Err(Error::config(format!(
                "log_std length {} != mean net output dim {}",
                log_std.len(),
                mean_net.output_dim()
            )));
        }
        let mut policy = GaussianPolicy { mean_net, log_std };
        policy.clamp_log_std();
        Ok(policy)
    }

    /// Mean net `[obs, hidden.., act]` from `Uniform(-scale, scale)`; log_std
    /// starts at zero (unit sigma) independent of the scale knob.
    pub fn uniform_init(
        obs_dim: usize,
        hidden: &[usize],
        act_dim: usize,
        activation: Activation,
        scale: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(obs_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(act_dim);
        let mean_net = Mlp::uniform(&sizes, activation, scale, rng)?;
        Ok(GaussianPolicy {
            mean_net,
            log_std: vec![0.0; act_dim],
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.mean_net.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.mean_net.output_dim()
    }

    pub fn log_std(&self) -> &[f64] {
        &self.log_std
    }

    pub fn log_std_mut(&mut self) -> &mut [f64] {
        &mut self.log_std
    }

    pub fn clamp_log_std(&mut self) {
        for ls in &mut self.log_std {
            *ls = ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    /// Deterministic (mean) action.
    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        self.mean_net.forward(obs)
    }

    /// Sample an action and its log probability under the current policy.
    pub fn sample(&self, obs: &[f64], rng: &mut impl Rng) -> (Vec<f64>, f64) {
        let mean = self.mean_net.forward(obs);
        let action = gaussian_sample(&mean, &self.log_std, rng);
        let logp = gaussian_logp(&mean, &self.log_std, &action);
        (action, logp)
    }

    pub fn logp(&self, obs: &[f64], action: &[f64]) -> f64 {
        let mean = self.mean_net.forward(obs);
        gaussian_logp(&mean, &self.log_std, action)
    }

    pub fn entropy(&self) -> f64 {
        gaussian_entropy(&self.log_std)
    }

    /// Flat parameters: mean net (`[w0, b0, ...]`) then log_std.
    pub fn param_count(&self) -> usize {
        self.mean_net.param_count() + self.log_std.len()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = self.mean_net.flatten();
        flat.extend_from_slice(&self.log_std);
        flat
    }

    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::config(format!(
                "policy flat vector has length {}, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let split = self.mean_net.param_count();
        self.mean_net.load_flat(&flat[..split])?;
        self.log_std.copy_from_slice(&flat[split..]);
        self.clamp_log_std();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_stream, stream};

    #[test]
    fn standard_normal_log_density_at_zero() {
        let lp = gaussian_logp(&[0.0], &[0.0], &[0.0]);
        assert!((lp - (-0.9189385332046727)).abs() < 1e-12, "{lp}");
    }

    #[test]
    fn negating_mean_and_action_preserves_logp_bitwise() {
        let mut rng = rng_stream(5, stream::ACTIONS);
        for _ in 0..100 {
            let m: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ls: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..0.5)).collect();
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let neg_m: Vec<f64> = m.iter().map(|v| -v).collect();
            let neg_a: Vec<f64> = a.iter().map(|v| -v).collect();
            assert_eq!(
                gaussian_logp(&m, &ls, &a).to_bits(),
                gaussian_logp(&neg_m, &ls, &neg_a).to_bits()
            );
        }
    }

    #[test]
    fn logp_at_the_mode_is_closed_form() {
        let ls = [0.3, -0.7];
        let m = [1.0, -2.0];
        let lp = gaussian_logp(&m, &ls, &m);
        let expected = -(ls.iter().sum::<f64>()) - (2.0 / 2.0) * LN_2PI;
        assert!((lp - expected).abs() < 1e-12, "{lp} vs {expected}");
    }

    #[test]
    fn degenerate_sigma_sample_collapses_to_mean() {
        let mut rng = rng_stream(1, stream::ACTIONS);
        let mean = [3.5, -0.25];
        let s = gaussian_sample(&mean, &[LOG_STD_MIN, LOG_STD_MIN], &mut rng);
        for (x, m) in s.iter().zip(mean.iter()) {
            assert!((x - m).abs() <= 1e-8 * m.abs() + 1e-6);
        }
    }

    #[test]
    fn sample_mean_converges() {
        let mut rng = rng_stream(2, stream::ACTIONS);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += gaussian_sample(&[0.0], &[0.0], &mut rng)[0];
        }
        let mean = sum / n as f64;
        assert!(mean.abs() < 0.02, "sample mean {mean}");
    }

    #[test]
    fn entropy_closed_form() {
        let h = gaussian_entropy(&[0.0]);
        assert!((h - 1.4189385332046727).abs() < 1e-12, "{h}");
        let h2 = gaussian_entropy(&[0.5, -0.5]);
        assert!((h2 - (1.0 + LN_2PI)).abs() < 1e-12);
    }

    #[test]
    fn grad_helpers_match_finite_differences() {
        let m = [0.4, -1.1];
        let ls = [-0.3, 0.2];
        let a = [1.0, -0.5];
        let mut gm = [0.0; 2];
        let mut gs = [0.0; 2];
        gaussian_logp_grad_mean(&m, &ls, &a, &mut gm);
        gaussian_logp_grad_log_std(&m, &ls, &a, &mut gs);
        let eps = 1e-6;
        for i in 0..2 {
            let mut mp = m;
            let mut mm = m;
            mp[i] += eps;
            mm[i] -= eps;
            let fd = (gaussian_logp(&mp, &ls, &a) - gaussian_logp(&mm, &ls, &a)) / (2.0 * eps);
            assert!((fd - gm[i]).abs() < 1e-8, "mean grad {i}: {fd} vs {}", gm[i]);

            let mut lp = ls;
            let mut lm = ls;
            lp[i] += eps;
            lm[i] -= eps;
            let fd = (gaussian_logp(&m, &lp, &a) - gaussian_logp(&m, &lm, &a)) / (2.0 * eps);
            assert!((fd - gs[i]).abs() < 1e-8, "log_std grad {i}: {fd} vs {}", gs[i]);
        }
    }

    #[test]
    fn policy_flatten_roundtrip_clamps_log_std() {
        let mut rng = rng_stream(8, stream::POLICY_INIT);
        let mut policy =
            GaussianPolicy::uniform_init(3, &[8], 2, Activation::Tanh, 0.1, &mut rng).unwrap();
        let mut flat = policy.flatten();
        let n = flat.len();
        flat[n - 1] = 9.0; // out of range
        policy.load_flat(&flat).unwrap();
        assert_eq!(policy.log_std()[1], LOG_STD_MAX);
    }
}
