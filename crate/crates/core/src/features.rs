//! Feature ranking, the consecutive-ratio cut-off, and multi-run stability
//! statistics.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slce::SlceModel;

/// Added to the ratio denominator so near-zero gate weights cannot blow up
/// the division; small enough to leave the argmax untouched for realistic
/// weight profiles.
pub const DEFAULT_CUTOFF_EPSILON: f64 = 1e-12;

/// Gate weights ranked by magnitude, with the cut-off position once
/// [`cutoff`] has been applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureReport {
    /// Feature indices by descending |b_j|, ties broken by ascending index.
    pub ranked_indices: Vec<usize>,
    /// The sorted |b_j|, non-increasing.
    pub ranked_weights: Vec<f64>,
    /// Number of retained features; equals d until a cut-off is applied.
    pub cutoff_index: usize,
    /// The maximizing consecutive ratio (1.0 until a cut-off is applied).
    pub cutoff_ratio: f64,
    /// The first `cutoff_index` ranked indices.
    pub selected: Vec<usize>,
    /// False until [`cutoff`] ran, and false after it when d < 2 leaves the
    /// rule undefined.
    pub cutoff_defined: bool,
}

impl FeatureReport {
    pub fn n_features(&self) -> usize {
        self.ranked_indices.len()
    }

    /// Two-column CSV of the descending gate magnitudes (sparsity curve).
    pub fn write_sparsity_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "rank,abs_weight")?;
        for (i, weight) in self.ranked_weights.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, weight)?;
        }
        Ok(())
    }

    /// Two-column CSV of the consecutive-weight ratios (ratio curve).
    pub fn write_ratio_csv(&self, epsilon: f64, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "position,ratio")?;
        for p in 1..self.ranked_weights.len() {
            let ratio = self.ranked_weights[p - 1] / (self.ranked_weights[p] + epsilon);
            writeln!(w, "{},{}", p, ratio)?;
        }
        Ok(())
    }
}

/// Ranks features by descending gate magnitude with deterministic
/// tie-breaking (ascending original index). No cut-off is applied yet.
pub fn rank_features(model: &SlceModel) -> FeatureReport {
    rank_gates(&model.b)
}

/// Same as [`rank_features`] but straight from a gate vector.
pub fn rank_gates(b: &[f64]) -> FeatureReport {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| {
        b[j].abs()
            .total_cmp(&b[i].abs())
            .then_with(|| i.cmp(&j))
    });
    let weights: Vec<f64> = order.iter().map(|&i| b[i].abs()).collect();
    FeatureReport {
        selected: order.clone(),
        ranked_indices: order,
        ranked_weights: weights,
        cutoff_index: b.len(),
        cutoff_ratio: 1.0,
        cutoff_defined: false,
    }
}

/// Applies the consecutive-ratio cut-off: the retained count is the
/// position p in 1..d-1 maximizing the ratio of ranked_weights[p-1] to
/// (ranked_weights[p] + epsilon), ties going to the smallest p (sparsest
/// selection). With d < 2 the rule is undefined; everything is retained
/// and the report is flagged.
pub fn cutoff(report: &FeatureReport, epsilon: f64) -> FeatureReport {
    assert!(epsilon > 0.0, "cutoff epsilon must be positive");
    let d = report.ranked_weights.len();
    let mut out = report.clone();
    if d < 2 {
        out.cutoff_index = d;
        out.cutoff_ratio = 1.0;
        out.selected = report.ranked_indices.clone();
        out.cutoff_defined = false;
        return out;
    }
    let mut best_p = 1;
    let mut best_ratio = f64::NEG_INFINITY;
    for p in 1..d {
        let ratio = report.ranked_weights[p - 1] / (report.ranked_weights[p] + epsilon);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_p = p;
        }
    }
    out.cutoff_index = best_p;
    out.cutoff_ratio = best_ratio;
    out.selected = report.ranked_indices[..best_p].to_vec();
    out.cutoff_defined = true;
    out
}

/// First k ranked indices.
pub fn top_k(report: &FeatureReport, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > report.ranked_indices.len() {
        return Err(Error::Config(format!(
            "k must be in 1..={}, got {k}",
            report.ranked_indices.len()
        )));
    }
    Ok(report.ranked_indices[..k].to_vec())
}

/// Jaccard statistics over the feature sets of several runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Each run's selection, sorted ascending.
    pub run_selections: Vec<Vec<usize>>,
    pub intersection_size: usize,
    pub union_size: usize,
    /// |intersection of all runs| / |union of all runs|.
    pub jaccard: f64,
    pub per_run_counts: Vec<usize>,
}

/// Multi-set Jaccard: the intersection and union run over ALL selections
/// simultaneously, not pairwise.
pub fn stability(selections: &[Vec<usize>]) -> Result<StabilityReport> {
    if selections.len() < 2 {
        return Err(Error::Config(format!(
            "stability requires >= 2 runs, got {}",
            selections.len()
        )));
    }
    let sets: Vec<BTreeSet<usize>> = selections
        .iter()
        .map(|s| s.iter().copied().collect())
        .collect();
    if let Some(i) = sets.iter().position(|s| s.is_empty()) {
        return Err(Error::Config(format!("run {i} selected no features")));
    }

    let mut intersection = sets[0].clone();
    let mut union = sets[0].clone();
    for set in &sets[1..] {
        intersection = intersection.intersection(set).copied().collect();
        union = union.union(set).copied().collect();
    }

    Ok(StabilityReport {
        run_selections: sets.iter().map(|s| s.iter().copied().collect()).collect(),
        intersection_size: intersection.len(),
        union_size: union.len(),
        jaccard: intersection.len() as f64 / union.len() as f64,
        per_run_counts: sets.iter().map(|s| s.len()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_from(b: &[f64]) -> FeatureReport {
        rank_gates(b)
    }

    #[test]
    fn rank_orders_by_magnitude_with_index_ties() {
        let r = report_from(&[0.5, -2.0, 0.5]);
        assert_eq!(r.ranked_indices, vec![1, 0, 2]);
        assert_eq!(r.ranked_weights, vec![2.0, 0.5, 0.5]);
    }

    #[test]
    fn rank_all_equal_keeps_identity_order() {
        let r = report_from(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(r.ranked_indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rank_tiny_weights() {
        let r = report_from(&[1e-8, 3.0, 1e-4]);
        assert_eq!(r.ranked_indices, vec![1, 2, 0]);
    }

    #[test]
    fn cutoff_finds_dominant_ratio() {
        let mut r = report_from(&[10.0, 9.0, 8.0, 0.01, 0.005]);
        r = cutoff(&r, DEFAULT_CUTOFF_EPSILON);
        assert_eq!(r.cutoff_index, 3);
        assert_eq!(r.selected, vec![0, 1, 2]);
        assert!(r.cutoff_defined);
        assert!((r.cutoff_ratio - 800.0).abs() < 1.0);
    }

    #[test]
    fn cutoff_plateau_takes_sparsest_position() {
        let mut r = report_from(&[2.0, 2.0, 2.0, 2.0]);
        r = cutoff(&r, DEFAULT_CUTOFF_EPSILON);
        assert_eq!(r.cutoff_index, 1);
    }

    #[test]
    fn cutoff_single_feature_is_flagged() {
        let mut r = report_from(&[1.5]);
        r = cutoff(&r, DEFAULT_CUTOFF_EPSILON);
        assert_eq!(r.cutoff_index, 1);
        assert!(!r.cutoff_defined);
    }

    #[test]
    fn top_k_prefixes() {
        let r = report_from(&[0.1, 5.0, 3.0, 0.2]);
        assert_eq!(top_k(&r, 1).unwrap(), vec![1]);
        assert_eq!(top_k(&r, 4).unwrap(), vec![1, 2, 3, 0]);
        assert!(top_k(&r, 5).is_err());
        assert!(top_k(&r, 0).is_err());
    }

    #[test]
    fn stability_identical_sets() {
        let sets = vec![vec![1, 2, 3]; 5];
        let s = stability(&sets).unwrap();
        assert_eq!(s.jaccard, 1.0);
        assert_eq!(s.intersection_size, 3);
        assert_eq!(s.union_size, 3);
    }

    #[test]
    fn stability_disjoint_sets() {
        let s = stability(&[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(s.jaccard, 0.0);
    }

    #[test]
    fn stability_matches_published_arithmetic() {
        // Five runs of sizes 887, 884, 886, 889, 886 sharing 876 common
        // members, with the per-run extras drawn as overlapping windows of a
        // 21-element pool so the union is exactly 897. The jaccard must come
        // out 0.9766 to within 1e-4.
        let common: Vec<usize> = (0..876).collect();
        let extras: Vec<usize> = (900..921).collect();
        let windows = [(0usize, 11usize), (5, 13), (8, 18), (8, 21), (11, 21)];
        let runs: Vec<Vec<usize>> = windows
            .iter()
            .map(|&(lo, hi)| {
                let mut run = common.clone();
                run.extend_from_slice(&extras[lo..hi]);
                run
            })
            .collect();
        assert_eq!(
            runs.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![887, 884, 886, 889, 886]
        );
        let s = stability(&runs).unwrap();
        assert_eq!(s.intersection_size, 876);
        assert_eq!(s.union_size, 897);
        assert!((s.jaccard - 0.9766).abs() <= 1e-4, "jaccard {}", s.jaccard);
    }

    #[test]
    fn stability_rejects_degenerate_input() {
        assert!(stability(&[vec![1]]).is_err());
        assert!(stability(&[vec![1], vec![]]).is_err());
    }

    #[test]
    fn adding_element_to_one_run_decreases_jaccard() {
        let base = vec![vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]];
        let j0 = stability(&base).unwrap().jaccard;
        let mut bumped = base.clone();
        bumped[1].push(99);
        let j1 = stability(&bumped).unwrap().jaccard;
        assert!(j1 < j0);
    }

    #[test]
    fn csv_emitters_have_expected_shape() {
        let mut r = report_from(&[3.0, 1.0, 0.01]);
        r = cutoff(&r, DEFAULT_CUTOFF_EPSILON);
        let mut sparsity = Vec::new();
        r.write_sparsity_csv(&mut sparsity).unwrap();
        let text = String::from_utf8(sparsity).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("rank,abs_weight"));

        let mut ratio = Vec::new();
        r.write_ratio_csv(DEFAULT_CUTOFF_EPSILON, &mut ratio).unwrap();
        let text = String::from_utf8(ratio).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}

#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn weight_vec() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.001f64..100.0, 2..40)
    }

    proptest! {
        #[test]
        fn top_k_prefix_nesting(b in weight_vec()) {
            let r = rank_gates(&b);
            for k in 1..b.len() {
                let small = top_k(&r, k).unwrap();
                let big = top_k(&r, k + 1).unwrap();
                prop_assert_eq!(&big[..k], &small[..]);
            }
        }

        #[test]
        fn cutoff_scale_invariant(b in weight_vec(), alpha in 0.01f64..100.0) {
            let r = rank_gates(&b);
            let scaled: Vec<f64> = b.iter().map(|v| v * alpha).collect();
            let rs = rank_gates(&scaled);
            let c = cutoff(&r, DEFAULT_CUTOFF_EPSILON);
            let cs = cutoff(&rs, DEFAULT_CUTOFF_EPSILON * alpha);
            prop_assert_eq!(c.cutoff_index, cs.cutoff_index);
        }

        #[test]
        fn rank_is_permutation_equivariant(b in weight_vec(), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..b.len()).collect();
            perm.shuffle(&mut rng);
            // permuted[new] = b[perm[new]]
            let permuted: Vec<f64> = perm.iter().map(|&old| b[old]).collect();
            let r = rank_gates(&b);
            let rp = rank_gates(&permuted);
            // Compare the multisets of ranked weights; indices map through perm.
            prop_assert_eq!(&r.ranked_weights, &rp.ranked_weights);
            let mapped: Vec<f64> = rp.ranked_indices.iter().map(|&i| permuted[i].abs()).collect();
            let original: Vec<f64> = r.ranked_indices.iter().map(|&i| b[i].abs()).collect();
            prop_assert_eq!(mapped, original);
        }

        #[test]
        fn cutoff_index_in_bounds(b in weight_vec()) {
            let r = cutoff(&rank_gates(&b), DEFAULT_CUTOFF_EPSILON);
            prop_assert!(r.cutoff_index >= 1 && r.cutoff_index <= b.len());
            prop_assert_eq!(r.selected.len(), r.cutoff_index);
        }
    }
}
