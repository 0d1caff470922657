//! Full-batch Adam over flat parameter vectors, plus a central-difference
//! gradient oracle used to verify every analytic gradient in this crate.

use crate::error::{Error, Result};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam optimizer state for one flat parameter vector.
///
/// Matrices are flattened in column-major order before being handed to the
/// optimizer, so state is reproducible across runs for a fixed seed.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with zero moments and the reference defaults
    /// beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        AdamState {
            step_count: 0,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            learning_rate,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, params: &mut [f64], gradient: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || gradient.len() != params.len() {
            return Err(Error::Dim(format!(
                "adam: params {}, gradient {}, moments {}",
                params.len(),
                gradient.len(),
                self.first_moment.len()
            )));
        }
        if let Some(i) = gradient.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric {
                what: format!("gradient entry {i}"),
                iteration: self.step_count as usize,
            });
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);

        for i in 0..params.len() {
            let g = gradient[i];
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Central finite differences: (cost(p + h e_i) - cost(p - h e_i)) / 2h
/// per coordinate.
pub fn finite_diff_gradient<F>(cost: F, params: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut grad = Vec::with_capacity(params.len());
    let mut probe = params.to_vec();
    for i in 0..params.len() {
        probe[i] = params[i] + h;
        let plus = cost(&probe);
        probe[i] = params[i] - h;
        let minus = cost(&probe);
        probe[i] = params[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric {
                what: format!("cost evaluation near coordinate {i}"),
                iteration: 0,
            });
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// max_i |a_i - b_i| / max(|b_i|, floor), the relative-error metric used by
/// the gradient checks.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
        .fold(0.0, f64::max)
}
