//! Linear Centroid-Encoder: fit a rank-k transformation A so that A A^T x
//! approximates the class centroid of x.
//!
//! The cost is L(A) = 1/2 ||Ctilde - A A^T X||_F^2 with the analytic
//! gradient A A^T X X^T A + X X^T A A^T A - (Ctilde X^T + X Ctilde^T) A.
//! Products are ordered so no d x d intermediate is ever materialized.

use ndarray::{Array2, ArrayBase, Data, Ix2, ShapeBuilder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::AdamState;

pub const DEFAULT_EMBEDDING_DIM: usize = 5;
pub const DEFAULT_LEARNING_RATE: f64 = 0.002;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: u64 = 50_000;

/// Training configuration for the centroid-reconstruction step.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LceConfig {
    pub embedding_dim: usize,
    pub learning_rate: f64,
    pub convergence_tol: f64,
    pub max_iterations: u64,
    pub init_seed: u64,
    pub init_scale: f64,
}

impl Default for LceConfig {
    fn default() -> Self {
        LceConfig {
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            learning_rate: DEFAULT_LEARNING_RATE,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            init_seed: 0,
            init_scale: 1.0,
        }
    }
}

impl LceConfig {
    pub fn with_seed(seed: u64) -> Self {
        LceConfig {
            init_seed: seed,
            ..LceConfig::default()
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.embedding_dim == 0 || self.embedding_dim > d {
            return Err(Error::Config(format!(
                "embedding_dim must be in 1..={d}, got {}",
                self.embedding_dim
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !self.init_scale.is_finite() || self.init_scale <= 0.0 {
            return Err(Error::Config("init_scale must be positive".into()));
        }
        if self.convergence_tol < 0.0 {
            return Err(Error::Config("convergence_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Fitted transformation matrix plus its training trace.
///
/// `cost_trace[0]` is the cost at initialization; each iteration appends one
/// entry, so `cost_trace.len() == iterations_run + 1`.
#[derive(Debug, Clone)]
pub struct LceModel {
    pub a: Array2<f64>,
    pub embedding_dim: usize,
    pub cost_trace: Vec<f64>,
    pub converged: bool,
    pub iterations_run: u64,
}

fn check_dims(
    a: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
) -> Result<()> {
    if a.nrows() != x.nrows() || x.dim() != ctilde.dim() {
        return Err(Error::Dim(format!(
            "A is {:?}, X is {:?}, Ctilde is {:?}",
            a.dim(),
            x.dim(),
            ctilde.dim()
        )));
    }
    Ok(())
}

/// 1/2 ||Ctilde - A A^T X||_F^2.
pub fn lce_cost(
    a: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
) -> Result<f64> {
    check_dims(a, x, ctilde)?;
    let proj = a.t().dot(x); // k x n
    let recon = a.dot(&proj); // d x n
    let mut sum_sq = 0.0;
    for (c, r) in ctilde.iter().zip(recon.iter()) {
        let e = c - r;
        sum_sq += e * e;
    }
    let cost = 0.5 * sum_sq;
    if !cost.is_finite() {
        return Err(Error::Numeric {
            what: "cost".into(),
            iteration: 0,
        });
    }
    Ok(cost)
}

/// Analytic gradient of [`lce_cost`] with respect to A.
pub fn lce_gradient(
    a: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
) -> Result<Array2<f64>> {
    check_dims(a, x, ctilde)?;
    let p = a.t().dot(x); // A^T X, k x n
    let ppt = p.dot(&p.t()); // A^T X X^T A, k x k
    let ata = a.t().dot(a); // k x k

    // A (A^T X X^T A)
    let term1 = a.dot(&ppt);
    // X (X^T A A^T A)
    let term2 = x.dot(&p.t().dot(&ata));
    // Ctilde (X^T A) + X (Ctilde^T A)
    let term3 = ctilde.dot(&p.t()) + x.dot(&ctilde.t().dot(a));

    Ok(term1 + term2 - term3)
}

/// Runs full-batch Adam on the analytic gradient from a seeded Gaussian
/// initialization (stddev init_scale / sqrt(d)), stopping when the absolute
/// difference of two consecutive costs is at most `convergence_tol` or when
/// `max_iterations` is hit.
pub fn fit_lce(
    x: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    ctilde: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    cfg: &LceConfig,
) -> Result<LceModel> {
    let (d, _n) = x.dim();
    if x.dim() != ctilde.dim() {
        return Err(Error::Dim(format!(
            "X is {:?}, Ctilde is {:?}",
            x.dim(),
            ctilde.dim()
        )));
    }
    cfg.validate(d)?;
    let k = cfg.embedding_dim;

    // Parameters live in a flat column-major vector; the matrix view shares
    // that storage.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.init_seed);
    let normal = Normal::new(0.0, cfg.init_scale / (d as f64).sqrt())
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut params: Vec<f64> = (0..d * k).map(|_| normal.sample(&mut rng)).collect();

    let a0 = ndarray::ArrayView2::from_shape((d, k).f(), &params).unwrap();
    let initial_cost = lce_cost(&a0, x, ctilde)?;
    let mut trace = vec![initial_cost];
    let mut prev_cost = initial_cost;
    let mut converged = false;

    let mut adam = AdamState::new(d * k, cfg.learning_rate);
    let mut grad_flat = vec![0.0; d * k];

    for iteration in 1..=cfg.max_iterations {
        {
            let a = ndarray::ArrayView2::from_shape((d, k).f(), &params).unwrap();
            let grad = lce_gradient(&a, x, ctilde)?;
            for (dst, src) in grad_flat.iter_mut().zip(grad.t().iter()) {
                *dst = *src;
            }
        }
        adam.step(&mut params, &grad_flat).map_err(|e| match e {
            Error::Numeric { what, .. } => Error::Numeric {
                what,
                iteration: iteration as usize,
            },
            other => other,
        })?;

        let a = ndarray::ArrayView2::from_shape((d, k).f(), &params).unwrap();
        let cost = lce_cost(&a, x, ctilde).map_err(|e| match e {
            Error::Numeric { what, .. } => Error::Numeric {
                what,
                iteration: iteration as usize,
            },
            other => other,
        })?;
        trace.push(cost);
        if (cost - prev_cost).abs() <= cfg.convergence_tol {
            converged = true;
            break;
        }
        prev_cost = cost;
    }

    let a = Array2::from_shape_vec((d, k).f(), params)
        .unwrap()
        .as_standard_layout()
        .into_owned();
    let iterations_run = (trace.len() - 1) as u64;
    Ok(LceModel {
        a,
        embedding_dim: k,
        cost_trace: trace,
        converged,
        iterations_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{finite_diff_gradient, max_relative_error};
    use ndarray::array;
    use rand::Rng;

    fn rand_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    /// Independent elementwise oracle for the cost.
    fn cost_oracle(a: &Array2<f64>, x: &Array2<f64>, ctilde: &Array2<f64>) -> f64 {
        let (d, n) = x.dim();
        let k = a.ncols();
        let mut sum = 0.0;
        for j in 0..n {
            for r in 0..d {
                // (A A^T x_j)_r via explicit loops
                let mut recon = 0.0;
                for c in 0..k {
                    let mut proj = 0.0;
                    for s in 0..d {
                        proj += a[(s, c)] * x[(s, j)];
                    }
                    recon += a[(r, c)] * proj;
                }
                let e = ctilde[(r, j)] - recon;
                sum += e * e;
            }
        }
        0.5 * sum
    }

    #[test]
    fn zero_a_cost_is_half_target_norm() {
        let ctilde = array![[1.0, 2.0], [3.0, 4.0]];
        let x = array![[0.5, 0.5], [0.5, 0.5]];
        let a = Array2::zeros((2, 2));
        let expected = 0.5 * ctilde.iter().map(|v| v * v).sum::<f64>();
        assert_eq!(lce_cost(&a, &x, &ctilde).unwrap(), expected);
    }

    #[test]
    fn perfect_reconstruction_cost_is_zero() {
        // A = e1 orthonormal, X = Ctilde in span(e1).
        let a = array![[1.0], [0.0]];
        let x = array![[2.0], [0.0]];
        assert_eq!(lce_cost(&a, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn cost_matches_elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = rand_matrix(&mut rng, 6, 2);
        let x = rand_matrix(&mut rng, 6, 4);
        let ctilde = rand_matrix(&mut rng, 6, 4);
        let got = lce_cost(&a, &x, &ctilde).unwrap();
        let want = cost_oracle(&a, &x, &ctilde);
        assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn cost_independent_of_a_when_x_zero() {
        let ctilde = array![[1.0, -2.0], [0.5, 3.0]];
        let x = Array2::zeros((2, 2));
        let expected = 0.5 * ctilde.iter().map(|v| v * v).sum::<f64>();
        for scale in [0.0, 0.1, 1.0, 10.0] {
            let a = Array2::from_elem((2, 2), scale);
            assert_eq!(lce_cost(&a, &x, &ctilde).unwrap(), expected);
        }
    }

    #[test]
    fn rotation_invariance_of_cost() {
        // Q orthogonal (Gram-Schmidt of a random k x k): cost(AQ) = cost(A).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 3;
        let a = rand_matrix(&mut rng, 7, k);
        let x = rand_matrix(&mut rng, 7, 5);
        let ctilde = rand_matrix(&mut rng, 7, 5);

        let raw = rand_matrix(&mut rng, k, k);
        let mut q = Array2::<f64>::zeros((k, k));
        for j in 0..k {
            let mut v = raw.column(j).to_owned();
            for i in 0..j {
                let qi = q.column(i);
                let dot = v.dot(&qi);
                v = v - dot * &qi.to_owned();
            }
            let norm = v.dot(&v).sqrt();
            q.column_mut(j).assign(&(v / norm));
        }

        let aq = a.dot(&q);
        let c1 = lce_cost(&a, &x, &ctilde).unwrap();
        let c2 = lce_cost(&aq, &x, &ctilde).unwrap();
        assert!((c1 - c2).abs() <= 1e-9 * c1.max(1.0));
    }

    #[test]
    fn gradient_zero_at_zero_a() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let ctilde = array![[0.5, 0.5], [1.0, 1.0]];
        let a = Array2::zeros((2, 2));
        let g = lce_gradient(&a, &x, &ctilde).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_zero_at_perfect_reconstruction() {
        // X = Ctilde with orthonormal A spanning their column space.
        let a = array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        let x = array![[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]];
        let g = lce_gradient(&a, &x, &x).unwrap();
        for v in g.iter() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let d = rng.random_range(2..=10);
            let k = rng.random_range(1..=4.min(d));
            let n = rng.random_range(1..=8);
            let a = rand_matrix(&mut rng, d, k);
            let x = rand_matrix(&mut rng, d, n);
            let ctilde = rand_matrix(&mut rng, d, n);

            let analytic = lce_gradient(&a, &x, &ctilde).unwrap();
            // Flatten column-major to match the optimizer convention.
            let flat: Vec<f64> = a.t().iter().copied().collect();
            let numeric = finite_diff_gradient(
                |p| {
                    let av = ndarray::ArrayView2::from_shape((d, k).f(), p).unwrap();
                    lce_cost(&av, &x, &ctilde).unwrap()
                },
                &flat,
                1e-5,
            )
            .unwrap();
            let analytic_flat: Vec<f64> = analytic.t().iter().copied().collect();
            let err = max_relative_error(&analytic_flat, &numeric, 1e-6);
            assert!(err <= 1e-5, "relative error {err} too large (d={d} k={k} n={n})");
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = Array2::zeros((3, 2));
        let x = Array2::zeros((4, 5));
        let ctilde = Array2::zeros((4, 5));
        assert!(lce_cost(&a, &x, &ctilde).is_err());
        assert!(lce_gradient(&a, &x, &ctilde).is_err());
    }

    fn easy_two_class() -> (Array2<f64>, Array2<f64>, f64) {
        // Two tight clusters at (+3, 0) and (-3, 0), 10 points each.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n_per = 10;
        let mut x = Array2::<f64>::zeros((2, 2 * n_per));
        let mut labels = vec![0usize; 2 * n_per];
        for i in 0..2 * n_per {
            let class = i % 2;
            labels[i] = class;
            let cx = if class == 0 { 3.0 } else { -3.0 };
            x[(0, i)] = cx + 0.1 * rng.random_range(-1.0..1.0);
            x[(1, i)] = 0.1 * rng.random_range(-1.0..1.0);
        }
        let ds = crate::data::Dataset::new(x.clone(), labels, None, None).unwrap();
        let ct = crate::data::build_centroid_target(&ds);
        let mut scatter = 0.0;
        for i in 0..ds.n_samples() {
            let diff = &x.column(i) - &ct.targets.column(i);
            scatter += diff.dot(&diff);
        }
        (x, ct.targets, 0.5 * scatter)
    }

    #[test]
    fn fit_reaches_within_class_scatter_on_easy_instance() {
        let (x, ctilde, scatter) = easy_two_class();
        let cfg = LceConfig {
            embedding_dim: 2,
            init_seed: 1,
            ..LceConfig::default()
        };
        let model = fit_lce(&x, &ctilde, &cfg).unwrap();
        let initial = model.cost_trace[0];
        let last = *model.cost_trace.last().unwrap();
        assert!(last <= initial);
        assert!(
            last <= scatter + 1e-3,
            "final cost {last} should not exceed within-class scatter {scatter}"
        );
        assert!(
            last <= 0.01 * initial,
            "cost should drop >= 99% on the easy instance (init {initial}, final {last})"
        );
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, ctilde, _) = easy_two_class();
        let cfg = LceConfig {
            embedding_dim: 2,
            init_seed: 3,
            max_iterations: 200,
            ..LceConfig::default()
        };
        let m1 = fit_lce(&x, &ctilde, &cfg).unwrap();
        let m2 = fit_lce(&x, &ctilde, &cfg).unwrap();
        assert_eq!(m1.cost_trace, m2.cost_trace);
        assert_eq!(m1.a, m2.a);
    }

    #[test]
    fn infinite_tolerance_stops_after_one_iteration() {
        let (x, ctilde, _) = easy_two_class();
        let cfg = LceConfig {
            embedding_dim: 2,
            convergence_tol: f64::INFINITY,
            init_seed: 0,
            ..LceConfig::default()
        };
        let model = fit_lce(&x, &ctilde, &cfg).unwrap();
        assert!(model.converged);
        assert_eq!(model.iterations_run, 1);
        assert_eq!(model.cost_trace.len(), 2);
    }

    #[test]
    fn max_iterations_reported_as_not_converged() {
        let (x, ctilde, _) = easy_two_class();
        let cfg = LceConfig {
            embedding_dim: 2,
            convergence_tol: 0.0,
            max_iterations: 5,
            init_seed: 0,
            ..LceConfig::default()
        };
        let model = fit_lce(&x, &ctilde, &cfg).unwrap();
        assert!(!model.converged);
        assert_eq!(model.iterations_run, 5);
    }
}
