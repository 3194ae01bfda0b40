//! Central-difference verification of analytic gradients.

/// A scalar objective over a flat parameter vector, together with its
/// analytic gradient. Every loss assembled in this repository is exposed
/// through this trait somewhere so it can be checked against finite
/// differences.
pub trait ScalarLoss {
    fn value(&self, params: &[f64]) -> f64;
    fn gradient(&self, params: &[f64]) -> Vec<f64>;
}

impl<V, G> ScalarLoss for (V, G)
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value(&self, params: &[f64]) -> f64 {
        (self.0)(params)
    }
    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        (self.1)(params)
    }
}

/// Max over parameters of the symmetric relative error between the analytic
/// gradient and the central difference
/// `|analytic - diff| / max(1e-8, |analytic| + |diff|)`.
///
/// `epsilon` must lie in `(0, 1e-2]`.
pub fn gradient_check(loss: &dyn ScalarLoss, params: &[f64], epsilon: f64) -> f64 {
    assert!(
        epsilon > 0.0 && epsilon <= 1e-2,
        "epsilon must be in (0, 1e-2], got {epsilon}"
    );
    let analytic = loss.gradient(params);
    assert_eq!(analytic.len(), params.len(), "gradient length mismatch");
    let mut work = params.to_vec();
    let mut max_err = 0.0f64;
    for i in 0..params.len() {
        let orig = work[i];
        work[i] = orig + epsilon;
        let up = loss.value(&work);
        work[i] = orig - epsilon;
        let down = loss.value(&work);
        work[i] = orig;
        let diff = (up - down) / (2.0 * epsilon);
        let denom = (analytic[i].abs() + diff.abs()).max(1e-8);
        max_err = max_err.max((analytic[i] - diff).abs() / denom);
    }
    max_err
}
