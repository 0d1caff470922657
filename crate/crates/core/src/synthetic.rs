//! Generated two-class datasets with known informative features, used as a
//! ground-truth oracle for selection quality.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::Result;

/// Separation and noise scale used by the test corpus. The ratio matches
/// the sparsity-parameter range the tooling defaults to (0.04..0.5): the
/// gate gradients of the smooth term scale with the square of the data
/// scale, so data of this magnitude puts the useful lambda values inside
/// that range.
pub const CORPUS_SEPARATION: f64 = 1.2;
pub const CORPUS_NOISE_STD: f64 = 0.4;

/// Balanced two-class dataset where only the first `n_informative` features
/// carry class signal (class means at +/- separation/2, within-class std
/// `noise_std`); all remaining features are zero-mean noise with the same
/// std for both classes. Returns the dataset and the planted informative
/// indices.
pub fn planted_two_class(
    d: usize,
    n: usize,
    n_informative: usize,
    separation: f64,
    noise_std: f64,
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    assert!(n_informative <= d && n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).unwrap();

    let mut x = Array2::<f64>::zeros((d, n));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        labels.push(class);
        let shift = if class == 0 {
            separation / 2.0
        } else {
            -separation / 2.0
        };
        for j in 0..d {
            let base = noise.sample(&mut rng);
            x[(j, i)] = if j < n_informative { base + shift } else { base };
        }
    }
    let ds = Dataset::new(x, labels, None, None)?;
    Ok((ds, (0..n_informative).collect()))
}

/// The d=100, n=100, 10-informative-feature instance the test corpus uses.
pub fn corpus_instance(seed: u64) -> Result<(Dataset, Vec<usize>)> {
    planted_two_class(100, 100, 10, CORPUS_SEPARATION, CORPUS_NOISE_STD, seed)
}
