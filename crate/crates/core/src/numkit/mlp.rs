//! Feed-forward network with analytic reverse-mode gradients.
//!
//! Weights are row-major `(n_out, n_in)` per layer; hidden layers share one
//! activation, the output layer is linear. Gradients accumulate into a flat
//! buffer laid out as `[w0, b0, w1, b1, ...]` so the optimizer can treat all
//! parameters uniformly.

use crate::error::{Error, Result};
use rand::Rng;

/// Hidden-layer activation.
///
/// `Tanh` is implemented as `copysign(tanh(|x|), x)` so it is odd *bitwise*:
/// a zero-bias tanh network satisfies `forward(-x) == -forward(x)` exactly,
/// which the sign-symmetry tests and the equivariant-initialization argument
/// rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.abs().tanh().copysign(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the post-activation value.
    #[inline]
    fn deriv_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::config(format!(
                "unknown activation '{other}' (expected tanh or relu)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
struct Layer {
    /// Row-major `(n_out, n_in)`.
    w: Vec<f64>,
    b: Vec<f64>,
    n_in: usize,
    n_out: usize,
}

/// Dense feed-forward network.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Layer>,
    sizes: Vec<usize>,
    activation: Activation,
}

/// Reusable buffers for one forward/backward pass.
#[derive(Debug, Clone)]
pub struct FwdScratch {
    /// `acts[0]` is the input; `acts[l + 1]` the post-activation of layer `l`.
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl FwdScratch {
    /// Network output of the most recent forward pass.
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("scratch has layers")
    }
}

impl Mlp {
    /// All-zero network. `sizes` is `[input, hidden..., output]`.
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::config(format!(
                "layer_sizes needs at least input and output, got {sizes:?}"
            )));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::config(format!("layer sizes must be positive: {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|p| Layer {
                w: vec![0.0; p[0] * p[1]],
                b: vec![0.0; p[1]],
                n_in: p[0],
                n_out: p[1],
            })
            .collect();
        Ok(Mlp {
            layers,
            sizes: sizes.to_vec(),
            activation,
        })
    }

    /// Network with every weight and bias drawn i.i.d. from
    /// `Uniform(-scale, scale)`. `scale = 0` gives the zero network.
    pub fn uniform(
        sizes: &[usize],
        activation: Activation,
        scale: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !(scale >= 0.0) {
            return Err(Error::config(format!("init scale must be >= 0, got {scale}")));
        }
        let mut net = Self::zeros(sizes, activation)?;
        if scale > 0.0 {
            for layer in &mut net.layers {
                for w in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                    *w = rng.random_range(-scale..scale);
                }
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Total parameter count: sum over layers of `(n_in + 1) * n_out`.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| (l.n_in + 1) * l.n_out).sum()
    }

    /// Mutable view of layer `l`'s `(weights, biases)` for tests and fixtures.
    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let layer = &mut self.layers[l];
        (&mut layer.w, &mut layer.b)
    }

    pub fn make_scratch(&self) -> FwdScratch {
        let max_width = *self.sizes.iter().max().unwrap();
        FwdScratch {
            acts: self.sizes.iter().map(|&s| vec![0.0; s]).collect(),
            delta: vec![0.0; max_width],
            delta_prev: vec![0.0; max_width],
        }
    }

    /// Plain forward pass (allocates; no finiteness checks).
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut scratch = self.make_scratch();
        self.forward_into(input, &mut scratch);
        scratch.output().to_vec()
    }

    /// Forward pass into reusable scratch. Output is `scratch.output()`.
    pub fn forward_into(&self, input: &[f64], scratch: &mut FwdScratch) {
        assert_eq!(
            input.len(),
            self.sizes[0],
            "input length {} != first layer size {}",
            input.len(),
            self.sizes[0]
        );
        scratch.acts[0].copy_from_slice(input);
        let n_layers = self.layers.len();
        for (l, layer) in self.layers.iter().enumerate() {
            let (prev, rest) = scratch.acts.split_at_mut(l + 1);
            let x = &prev[l];
            let out = &mut rest[0];
            let last = l + 1 == n_layers;
            for j in 0..layer.n_out {
                let row = &layer.w[j * layer.n_in..(j + 1) * layer.n_in];
                let z = layer.b[j]
                    + row
                        .iter()
                        .zip(x.iter())
                        .fold(0.0, |acc, (w, xi)| acc + w * xi);
                out[j] = if last { z } else { self.activation.apply(z) };
            }
        }
    }

    /// Checked forward pass: reports the first layer producing a non-finite
    /// activation.
    pub fn forward_checked(&self, input: &[f64], scratch: &mut FwdScratch) -> Result<()> {
        if input.len() != self.sizes[0] {
            return Err(Error::config(format!(
                "input length {} != first layer size {}",
                input.len(),
                self.sizes[0]
            )));
        }
        self.forward_into(input, scratch);
        for l in 0..self.layers.len() {
            if !super::all_finite(&scratch.acts[l + 1]) {
                return Err(Error::numeric(format!(
                    "non-finite activation at layer {l}"
                )));
            }
        }
        Ok(())
    }

    /// Reverse-mode pass. `d_output` is dLoss/d(output); parameter gradients
    /// are **accumulated** into `grads` (flat `[w0, b0, w1, b1, ...]` layout,
    /// length `param_count()`). `scratch` must hold the forward pass for the
    /// same input.
    pub fn backward(
        &self,
        scratch: &mut FwdScratch,
        d_output: &[f64],
        grads: &mut [f64],
    ) -> Result<()> {
        assert_eq!(d_output.len(), self.output_dim(), "d_output length mismatch");
        assert_eq!(grads.len(), self.param_count(), "grads length mismatch");

        scratch.delta[..d_output.len()].copy_from_slice(d_output);
        let mut offset = self.param_count();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            offset -= (layer.n_in + 1) * layer.n_out;
            let delta = &scratch.delta[..layer.n_out];
            if !super::all_finite(delta) {
                return Err(Error::numeric(format!("non-finite gradient at layer {l}")));
            }
            let a_prev = &scratch.acts[l];
            let (gw, gb) = grads[offset..offset + (layer.n_in + 1) * layer.n_out]
                .split_at_mut(layer.n_in * layer.n_out);
            for j in 0..layer.n_out {
                let dj = delta[j];
                gb[j] += dj;
                let grow = &mut gw[j * layer.n_in..(j + 1) * layer.n_in];
                for (g, a) in grow.iter_mut().zip(a_prev.iter()) {
                    *g += dj * a;
                }
            }
            if l > 0 {
                let dprev = &mut scratch.delta_prev[..layer.n_in];
                dprev.fill(0.0);
                for j in 0..layer.n_out {
                    let dj = delta[j];
                    let row = &layer.w[j * layer.n_in..(j + 1) * layer.n_in];
                    for (d, w) in dprev.iter_mut().zip(row.iter()) {
                        *d += w * dj;
                    }
                }
                for (d, a) in dprev.iter_mut().zip(a_prev.iter()) {
                    *d *= self.activation.deriv_from_output(*a);
                }
                let n_in = layer.n_in;
                for i in 0..n_in {
                    scratch.delta[i] = scratch.delta_prev[i];
                }
            }
        }
        Ok(())
    }

    /// Parameters as one flat vector (`[w0, b0, w1, b1, ...]`).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.w);
            out.extend_from_slice(&layer.b);
        }
        out
    }

    /// Load parameters from the flat layout produced by [`Mlp::flatten`].
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::config(format!(
                "flat parameter vector has length {}, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            layer.w.copy_from_slice(&flat[offset..offset + layer.n_in * layer.n_out]);
            offset += layer.n_in * layer.n_out;
            layer.b.copy_from_slice(&flat[offset..offset + layer.n_out]);
            offset += layer.n_out;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_stream, stream};

    #[test]
    fn zero_network_maps_anything_to_zero() {
        let net = Mlp::zeros(&[3, 5, 2], Activation::Tanh).unwrap();
        let out = net.forward(&[0.7, -1.3, 4.0]);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn single_linear_layer_matches_hand_arithmetic() {
        // W = [[2]], b = [1], x = [3] -> 7
        let mut net = Mlp::zeros(&[1, 1], Activation::Tanh).unwrap();
        {
            let (w, b) = net.layer_mut(0);
            w[0] = 2.0;
            b[0] = 1.0;
        }
        assert_eq!(net.forward(&[3.0]), vec![7.0]);
    }

    #[test]
    fn zero_bias_tanh_network_is_exactly_odd() {
        let mut rng = rng_stream(11, stream::POLICY_INIT);
        let mut net = Mlp::uniform(&[4, 8, 3], Activation::Tanh, 0.9, &mut rng).unwrap();
        for l in 0..net.num_layers() {
            let (_, b) = net.layer_mut(l);
            b.fill(0.0);
        }
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let y = net.forward(&x);
            let y_neg = net.forward(&neg);
            for (a, b) in y.iter().zip(y_neg.iter()) {
                assert_eq!(a.to_bits(), (-b).to_bits(), "oddness must be bitwise");
            }
        }
    }

    #[test]
    fn uniform_init_scale_zero_gives_zero_params() {
        let mut rng = rng_stream(0, stream::POLICY_INIT);
        let net = Mlp::uniform(&[2, 3, 1], Activation::Tanh, 0.0, &mut rng).unwrap();
        assert!(net.flatten().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn uniform_init_respects_bounds_and_is_centered() {
        let mut rng = rng_stream(42, stream::POLICY_INIT);
        let net = Mlp::uniform(&[64, 128, 32], Activation::Tanh, 0.1, &mut rng).unwrap();
        let flat = net.flatten();
        assert!(flat.len() >= 10_000);
        let max = crate::numkit::inf_norm(&flat);
        assert!(max <= 0.1, "max |w| = {max}");
        let mean = flat.iter().sum::<f64>() / flat.len() as f64;
        // std of the mean of n Uniform(-s, s) draws is s / sqrt(3 n)
        let sigma = 0.1 / (3.0 * flat.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean} vs 3 sigma {}", 3.0 * sigma);
    }

    #[test]
    fn uniform_init_is_deterministic_per_seed() {
        let a = Mlp::uniform(&[3, 4, 2], Activation::Relu, 0.5, &mut rng_stream(9, 1)).unwrap();
        let b = Mlp::uniform(&[3, 4, 2], Activation::Relu, 0.5, &mut rng_stream(9, 1)).unwrap();
        assert_eq!(a.flatten(), b.flatten());
    }

    #[test]
    fn flatten_roundtrip_and_param_count() {
        let mut rng = rng_stream(3, 1);
        let net = Mlp::uniform(&[3, 7, 2], Activation::Tanh, 0.2, &mut rng).unwrap();
        assert_eq!(net.param_count(), (3 + 1) * 7 + (7 + 1) * 2);
        let flat = net.flatten();
        let mut other = Mlp::zeros(&[3, 7, 2], Activation::Tanh).unwrap();
        other.load_flat(&flat).unwrap();
        assert_eq!(other.flatten(), flat);
    }

    #[test]
    fn linear_layer_quadratic_loss_gradient_matches_hand_calculus() {
        // loss = 0.5 * ||W x + b||^2, dL/dW = (W x + b) x^T, dL/db = W x + b
        let mut net = Mlp::zeros(&[2, 2], Activation::Tanh).unwrap();
        {
            let (w, b) = net.layer_mut(0);
            w.copy_from_slice(&[0.3, -0.7, 1.1, 0.2]);
            b.copy_from_slice(&[0.5, -0.25]);
        }
        let x = [1.5, -2.0];
        let mut scratch = net.make_scratch();
        net.forward_into(&x, &mut scratch);
        let y = scratch.output().to_vec();
        let mut grads = vec![0.0; net.param_count()];
        net.backward(&mut scratch, &y, &mut grads).unwrap();
        // expected dW[j][i] = y[j] * x[i], db[j] = y[j]
        let expected = [
            y[0] * x[0],
            y[0] * x[1],
            y[1] * x[0],
            y[1] * x[1],
            y[0],
            y[1],
        ];
        for (g, e) in grads.iter().zip(expected.iter()) {
            assert!((g - e).abs() < 1e-14, "{g} vs {e}");
        }
    }

    #[test]
    fn backward_reports_nonfinite_layer() {
        let net = Mlp::zeros(&[2, 3, 1], Activation::Tanh).unwrap();
        let mut scratch = net.make_scratch();
        net.forward_into(&[1.0, 2.0], &mut scratch);
        let mut grads = vec![0.0; net.param_count()];
        let err = net
            .backward(&mut scratch, &[f64::NAN], &mut grads)
            .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "{err}");
        assert!(err.to_string().contains("layer 1"), "{err}");
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let net = Mlp::zeros(&[3, 2], Activation::Tanh).unwrap();
        let mut scratch = net.make_scratch();
        let err = net.forward_checked(&[1.0, 2.0], &mut scratch).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
