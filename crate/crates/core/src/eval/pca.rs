//! PCA fitted on training samples only, used for the discriminative-power
//! analysis of selected feature sets.
//!
//! Components come from the eigendecomposition of the n x n Gram matrix of
//! the centered training data, so nothing of size d x d is ever formed even
//! for very wide feature matrices.

use ndarray::{Array1, Array2, ArrayBase, Data, Ix2};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcaEmbedding {
    /// d x c, orthonormal columns ordered by descending explained variance.
    pub components: Array2<f64>,
    /// Per-feature mean of the training data.
    pub mean: Array1<f64>,
    /// Variance captured by each component.
    pub explained_variance: Vec<f64>,
    /// n_train x c coordinates.
    pub train_coords: Array2<f64>,
    /// n_test x c coordinates.
    pub test_coords: Array2<f64>,
    /// Effective number of components (may be fewer than requested).
    pub n_components: usize,
    /// Set when the training data had rank below the requested component
    /// count.
    pub rank_deficient: bool,
}

/// Fits components on the training matrix (centering on the training mean
/// only) and projects both sets. The sign convention makes the
/// largest-magnitude loading of each component positive.
pub fn pca_embed(
    train: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    test: &ArrayBase<impl Data<Elem = f64>, Ix2>,
    n_components: usize,
) -> Result<PcaEmbedding> {
    let (d, n_train) = train.dim();
    if test.nrows() != d {
        return Err(Error::Dim(format!(
            "train has {d} features, test has {}",
            test.nrows()
        )));
    }
    if n_components == 0 || n_components > d.min(n_train) {
        return Err(Error::Config(format!(
            "n_components must be in 1..={}, got {n_components}",
            d.min(n_train)
        )));
    }

    let mean = train.mean_axis(ndarray::Axis(1)).unwrap();
    let centered = train - &mean.view().insert_axis(ndarray::Axis(1));

    // Gram trick: eigenvectors v of T^T T give components u = T v / sqrt(l).
    let gram = centered.t().dot(&centered);
    let (mut vals, vecs) = jacobi_eigen_symmetric(gram);

    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    vals = order.iter().map(|&i| vals[i]).collect();

    let tol = vals.first().copied().unwrap_or(0.0).max(0.0) * 1e-12;
    let rank = vals.iter().filter(|&&v| v > tol && v > 0.0).count();
    let effective = n_components.min(rank);
    let rank_deficient = effective < n_components;

    let mut components = Array2::<f64>::zeros((d, effective));
    let mut explained = Vec::with_capacity(effective);
    let denom = if n_train > 1 { (n_train - 1) as f64 } else { 1.0 };
    for c in 0..effective {
        let v = vecs.column(order[c]);
        let mut u = centered.dot(&v) / vals[c].sqrt();
        // Deterministic sign: the largest-magnitude loading is positive.
        let mut peak = 0;
        for (i, val) in u.iter().enumerate() {
            if val.abs() > u[peak].abs() {
                peak = i;
            }
        }
        if u[peak] < 0.0 {
            u.mapv_inplace(|x| -x);
        }
        components.column_mut(c).assign(&u);
        explained.push(vals[c] / denom);
    }

    let train_coords = centered.t().dot(&components);
    let test_centered = test - &mean.view().insert_axis(ndarray::Axis(1));
    let test_coords = test_centered.t().dot(&components);

    Ok(PcaEmbedding {
        components,
        mean,
        explained_variance: explained,
        train_coords,
        test_coords,
        n_components: effective,
        rank_deficient,
    })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors-as-columns), unsorted.
fn jacobi_eigen_symmetric(mut a: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut v = Array2::<f64>::eye(n);
    if n <= 1 {
        return ((0..n).map(|i| a[(i, i)]).collect(), v);
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // Symmetric matrix with eigenvalues 3 and 1 (eigenvectors along
        // (1,1)/sqrt2 and (1,-1)/sqrt2).
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = jacobi_eigen_symmetric(a.clone());
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-10);
        assert!((sorted[1] - 3.0).abs() < 1e-10);
        // A v = lambda v for each pair.
        for (i, &val) in vals.iter().enumerate() {
            let v = vecs.column(i);
            let av = a.dot(&v);
            for (x, y) in av.iter().zip(v.iter()) {
                assert!((x - val * y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_eigenpairs_property_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 6, 12] {
            let raw = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
            let sym = &raw + &raw.t();
            let (vals, vecs) = jacobi_eigen_symmetric(sym.clone());
            for (i, &val) in vals.iter().enumerate() {
                let v = vecs.column(i);
                let av = sym.dot(&v);
                for (x, y) in av.iter().zip(v.iter()) {
                    assert!((x - val * y).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn line_data_explained_by_first_component() {
        // Points along the direction (1, 2) with tiny jitter.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 50;
        let train = Array2::from_shape_fn((2, n), |(r, c)| {
            let t = c as f64 / n as f64 - 0.5;
            let dir = if r == 0 { 1.0 } else { 2.0 };
            10.0 * t * dir + 1e-4 * rng.random_range(-1.0..1.0)
        });
        let emb = pca_embed(&train, &train, 2).unwrap();
        let total: f64 = emb.explained_variance.iter().sum();
        assert!(emb.explained_variance[0] / total >= 0.999);
    }

    #[test]
    fn full_rank_projection_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let train = Array2::from_shape_fn((3, 10), |_| rng.random_range(-1.0..1.0));
        let emb = pca_embed(&train, &train, 3).unwrap();
        assert_eq!(emb.n_components, 3);
        // x_hat = mean + U coords
        let recon = &emb.components.dot(&emb.train_coords.t())
            + &emb.mean.view().insert_axis(ndarray::Axis(1));
        for (a, b) in recon.iter().zip(train.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn train_coordinates_are_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let train = Array2::from_shape_fn((4, 30), |_| rng.random_range(0.0..10.0));
        let test = Array2::from_shape_fn((4, 5), |_| rng.random_range(0.0..10.0));
        let emb = pca_embed(&train, &test, 2).unwrap();
        for c in 0..emb.n_components {
            let mean = emb.train_coords.column(c).sum() / 30.0;
            assert!(mean.abs() < 1e-9, "component {c} mean {mean}");
        }
    }

    #[test]
    fn rank_deficient_data_returns_fewer_components_with_flag() {
        // Rank-1 data in 3 dimensions.
        let train = Array2::from_shape_fn((3, 8), |(r, c)| (r + 1) as f64 * c as f64);
        let emb = pca_embed(&train, &train, 3).unwrap();
        assert!(emb.rank_deficient);
        assert_eq!(emb.n_components, 1);
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let train = Array2::from_shape_fn((5, 20), |_| rng.random_range(-1.0..1.0));
        let e1 = pca_embed(&train, &train, 3).unwrap();
        let e2 = pca_embed(&train, &train, 3).unwrap();
        assert_eq!(e1.components, e2.components);
        for c in 0..e1.n_components {
            let col = e1.components.column(c);
            let peak = col
                .iter()
                .cloned()
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(peak > 0.0);
        }
    }
}
