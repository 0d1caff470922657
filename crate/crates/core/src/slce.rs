//! Sparse Linear Centroid-Encoder: the two-step pipeline.
//!
//! Step 1 fits the transformation A with the feature gate fixed at identity,
//! which reduces to the plain centroid-encoder cost. Step 2 freezes A and
//! trains a diagonal gate vector b under an l1 penalty: first a short
//! warm-up without the penalty, then the penalized iterations. The penalty
//! is handled as a subgradient with sign(0) = 0 fed to Adam, so gates are
//! driven near zero rather than exactly zero; selection happens downstream
//! by ranking and cut-off.

use ndarray::{Array2, ArrayBase, Data, Ix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lce::{fit_lce, lce_cost, LceConfig};
use crate::optim::AdamState;

pub const DEFAULT_WARMUP_ITERATIONS: u64 = 10;
pub const DEFAULT_PENALTY_ITERATIONS: u64 = 2000;

/// Configuration for the two-step fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SlceConfig {
    pub lce: LceConfig,
    pub lambda: f64,
    pub warmup_iterations: u64,
    pub penalty_iterations: u64,
    pub learning_rate: f64,
}

impl Default for SlceConfig {
    fn default() -> Self {
        SlceConfig {
            lce: LceConfig::default(),
            lambda: 0.0,
            warmup_iterations: DEFAULT_WARMUP_ITERATIONS,
            penalty_iterations: DEFAULT_PENALTY_ITERATIONS,
            learning_rate: crate::lce::DEFAULT_LEARNING_RATE,
        }
    }
}

impl SlceConfig {
    pub fn new(lambda: f64, seed: u64) -> Self {
        SlceConfig {
            lce: LceConfig::with_seed(seed),
            lambda,
            ..SlceConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Frozen transformation, trained gate vector, and both training traces.
#[derive(Debug, Clone)]
pub struct SlceModel {
    /// Transformation matrix from step 1; never updated in step 2.
    pub a: Array2<f64>,
    /// Diagonal of the feature gate B, one entry per feature.
    pub b: Vec<f64>,
    pub lambda: f64,
    pub warmup_iterations: u64,
    pub penalty_iterations: u64,
    /// Step-2 cost after each iteration (warm-up entries exclude the
    /// penalty term since it is not being optimized yet).
    pub cost_trace: Vec<f64>,
    pub seed: u64,
    pub lce_converged: bool,
    pub lce_iterations: u64,
    pub lce_cost_trace: Vec<f64>,
}

impl SlceModel {
    pub fn n_features(&self) -> usize {
        self.b.len()
    }

    pub fn embedding_dim(&self) -> usize {
        self.a.ncols()
    }
}

/// Row j of X scaled by b[j], i.e. the product B X for diagonal B.
pub(crate) fn scale_rows(x: &ArrayBase<impl Data<Elem = f64>, Ix2>, b: &[f64]) -> Array2<f64> {
    let mut out = x.to_owned();
    for (j, mut row) in out.rows_mut().into_iter().enumerate() {
        let bj = b[j];
        row.mapv_inplace(|v| v * bj);
    }
    out
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_gate_dims(
    a: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    b: &[f64],
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
) -> Result<()> {
    if b.len() != x.nrows() || a.nrows() != x.nrows() {
        return Err(Error::Dim(format!(
            "gate length {} for A {:?}, X {:?}",
            b.len(),
            a.dim(),
            x.dim()
        )));
    }
    Ok(())
}

/// 1/2 ||Ctilde - A A^T (B X)||_F^2 + lambda * sum_j |b_j|.
///
/// With b all ones and lambda 0 this takes the exact computation path of
/// [`lce_cost`], so the reduction identity holds bitwise.
pub fn slce_cost(
    a: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    b: &[f64],
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    lambda: f64,
) -> Result<f64> {
    check_gate_dims(a, b, x)?;
    let gated = scale_rows(x, b);
    let smooth = lce_cost(a, &gated, ctilde)?;
    let l1: f64 = b.iter().map(|v| v.abs()).sum();
    Ok(smooth + lambda * l1)
}

/// Gradient of [`slce_cost`] with respect to the gate vector b, with the
/// penalty handled as a subgradient (sign(0) = 0).
///
/// Coordinate j is the row-j inner product of A A^T (A A^T B X - Ctilde)
/// with X, plus lambda * sign(b_j); no d x d product is formed.
pub fn slce_gate_gradient(
    a: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    b: &[f64],
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_gate_dims(a, b, x)?;
    if x.dim() != ctilde.dim() {
        return Err(Error::Dim(format!(
            "X is {:?}, Ctilde is {:?}",
            x.dim(),
            ctilde.dim()
        )));
    }
    let gated = scale_rows(x, b);
    let proj = a.t().dot(&gated); // k x n
    let residual = a.dot(&proj) - ctilde; // d x n
    let back = a.dot(&a.t().dot(&residual)); // A A^T residual, d x n

    let grad = back
        .rows()
        .into_iter()
        .zip(x.rows())
        .zip(b)
        .map(|((g_row, x_row), &bj)| {
            let mut dot = 0.0;
            for (g, v) in g_row.iter().zip(x_row.iter()) {
                dot += g * v;
            }
            dot + lambda * sign(bj)
        })
        .collect();
    Ok(grad)
}

/// Runs the full two-step pipeline: fit A by [`fit_lce`], then train the
/// gate vector from all ones with a fresh optimizer, `warmup_iterations`
/// steps without the penalty followed by `penalty_iterations` penalized
/// steps. A is frozen throughout step 2.
pub fn fit_slce(
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    cfg: &SlceConfig,
) -> Result<SlceModel> {
    cfg.validate()?;
    let step1 = fit_lce(x, ctilde, &cfg.lce)?;
    let a = step1.a;
    let d = x.nrows();

    let mut b = vec![1.0; d];
    let mut adam = AdamState::new(d, cfg.learning_rate);
    let total = cfg.warmup_iterations + cfg.penalty_iterations;
    let mut trace = Vec::with_capacity(total as usize);

    for iteration in 1..=total {
        let lambda = if iteration <= cfg.warmup_iterations {
            0.0
        } else {
            cfg.lambda
        };
        let grad = slce_gate_gradient(&a, &b, x, ctilde, lambda)?;
        adam.step(&mut b, &grad).map_err(|e| match e {
            Error::Numeric { what, .. } => Error::Numeric {
                what,
                iteration: iteration as usize,
            },
            other => other,
        })?;
        let cost = slce_cost(&a, &b, x, ctilde, lambda).map_err(|e| match e {
            Error::Numeric { what, .. } => Error::Numeric {
                what,
                iteration: iteration as usize,
            },
            other => other,
        })?;
        trace.push(cost);
    }

    Ok(SlceModel {
        a,
        b,
        lambda: cfg.lambda,
        warmup_iterations: cfg.warmup_iterations,
        penalty_iterations: cfg.penalty_iterations,
        cost_trace: trace,
        seed: cfg.lce.init_seed,
        lce_converged: step1.converged,
        lce_iterations: step1.iterations_run,
        lce_cost_trace: step1.cost_trace,
    })
}
