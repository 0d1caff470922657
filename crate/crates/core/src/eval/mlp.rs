//! One-hidden-layer ReLU classifier trained with full-batch Adam on softmax
//! cross-entropy. Small and deterministic; meant for scoring feature
//! subsets, not for production inference.

use ndarray::{Array1, Array2, ArrayBase, Axis, Data, Ix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::AdamState;

pub const DEFAULT_HIDDEN_UNITS: usize = 500;
pub const DEFAULT_MLP_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_MLP_EPOCHS: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_units: DEFAULT_HIDDEN_UNITS,
            learning_rate: DEFAULT_MLP_LEARNING_RATE,
            epochs: DEFAULT_MLP_EPOCHS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpClassifier {
    /// input_dim x hidden
    hidden_weights: Array2<f64>,
    hidden_bias: Array1<f64>,
    /// hidden x n_classes
    output_weights: Array2<f64>,
    output_bias: Array1<f64>,
    pub n_classes: usize,
    /// False when trained with zero epochs (predictions come from the
    /// random initialization).
    pub trained: bool,
}

impl MlpClassifier {
    fn logits(&self, features: &ArrayBase<impl Data<Elem = f64>, Ix2>) -> Array2<f64> {
        let z1 = self.hidden_weights.t().dot(features)
            + self.hidden_bias.view().insert_axis(Axis(1));
        let h = z1.mapv(|v| v.max(0.0));
        self.output_weights.t().dot(&h) + self.output_bias.view().insert_axis(Axis(1))
    }

    /// Predicted label per sample column (argmax logit, ties to the smaller
    /// label).
    pub fn predict(&self, features: &ArrayBase<impl Data<Elem = f64>, Ix2>) -> Vec<usize> {
        let z = self.logits(features);
        z.columns()
            .into_iter()
            .map(|col| {
                let mut best = 0;
                let mut best_v = col[0];
                for (i, &v) in col.iter().enumerate().skip(1) {
                    if v > best_v {
                        best_v = v;
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    pub fn accuracy(
        &self,
        features: &ArrayBase<impl Data<Elem = f64>, Ix2>,
        labels: &[usize],
    ) -> f64 {
        let pred = self.predict(features);
        fraction_correct(&pred, labels)
    }
}

/// Unweighted fraction of correct predictions.
pub fn fraction_correct(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Column-wise softmax with max subtraction.
fn softmax_columns(z: &Array2<f64>) -> Array2<f64> {
    let mut p = z.clone();
    for mut col in p.columns_mut() {
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        col.mapv_inplace(|v| (v - max).exp());
        let sum = col.sum();
        col.mapv_inplace(|v| v / sum);
    }
    p
}

/// Trains on a d x n matrix of selected features with labels in
/// 0..n_classes. Gaussian init scaled by 1/sqrt(fan-in), deterministic for
/// a fixed seed.
pub fn train_mlp(
    features: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    labels: &[usize],
    n_classes: usize,
    cfg: &MlpConfig,
) -> Result<MlpClassifier> {
    let (d, n) = features.dim();
    if labels.len() != n {
        return Err(Error::Dim(format!("{} labels for {n} samples", labels.len())));
    }
    if n_classes < 2 {
        return Err(Error::Config("classifier needs at least 2 classes".into()));
    }
    let mut present = vec![false; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(Error::Config(format!("label {l} out of range")));
        }
        present[l] = true;
    }
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(Error::Config(
            "training set contains a single class".into(),
        ));
    }

    let h = cfg.hidden_units;
    let m = n_classes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w1_init = Normal::new(0.0, 1.0 / (d as f64).sqrt()).unwrap();
    let w2_init = Normal::new(0.0, 1.0 / (h as f64).sqrt()).unwrap();
    let mut w1 = Array2::from_shape_vec(
        (d, h),
        (0..d * h).map(|_| w1_init.sample(&mut rng)).collect(),
    )
    .unwrap();
    let mut b1 = Array1::<f64>::zeros(h);
    let mut w2 = Array2::from_shape_vec(
        (h, m),
        (0..h * m).map(|_| w2_init.sample(&mut rng)).collect(),
    )
    .unwrap();
    let mut b2 = Array1::<f64>::zeros(m);

    // One-hot targets, M x n.
    let mut onehot = Array2::<f64>::zeros((m, n));
    for (i, &l) in labels.iter().enumerate() {
        onehot[(l, i)] = 1.0;
    }

    let mut adam_w1 = AdamState::new(d * h, cfg.learning_rate);
    let mut adam_b1 = AdamState::new(h, cfg.learning_rate);
    let mut adam_w2 = AdamState::new(h * m, cfg.learning_rate);
    let mut adam_b2 = AdamState::new(m, cfg.learning_rate);

    for epoch in 0..cfg.epochs {
        let z1 = w1.t().dot(features) + b1.view().insert_axis(Axis(1));
        let hidden = z1.mapv(|v| v.max(0.0));
        let z2 = w2.t().dot(&hidden) + b2.view().insert_axis(Axis(1));
        let probs = softmax_columns(&z2);

        let mut loss = 0.0;
        for (i, &l) in labels.iter().enumerate() {
            loss -= probs[(l, i)].max(1e-300).ln();
        }
        loss /= n as f64;
        if !loss.is_finite() {
            return Err(Error::Numeric {
                what: "classifier loss".into(),
                iteration: epoch,
            });
        }

        let dz2 = (&probs - &onehot) / n as f64; // M x n
        let dw2 = hidden.dot(&dz2.t()); // h x M
        let db2 = dz2.sum_axis(Axis(1));
        let mut dz1 = w2.dot(&dz2); // h x n
        for (v, z) in dz1.iter_mut().zip(z1.iter()) {
            if *z <= 0.0 {
                *v = 0.0;
            }
        }
        let dw1 = features.dot(&dz1.t()); // d x h
        let db1 = dz1.sum_axis(Axis(1));

        // dot() may hand back column-major buffers; the optimizer wants the
        // same element order as the parameter arrays.
        let dw1 = dw1.as_standard_layout();
        let dw2 = dw2.as_standard_layout();
        adam_w1.step(w1.as_slice_mut().unwrap(), dw1.as_slice().unwrap())?;
        adam_b1.step(b1.as_slice_mut().unwrap(), db1.as_slice().unwrap())?;
        adam_w2.step(w2.as_slice_mut().unwrap(), dw2.as_slice().unwrap())?;
        adam_b2.step(b2.as_slice_mut().unwrap(), db2.as_slice().unwrap())?;
    }

    Ok(MlpClassifier {
        hidden_weights: w1,
        hidden_bias: b1,
        output_weights: w2,
        output_bias: b2,
        n_classes: m,
        trained: cfg.epochs > 0,
    })
}
