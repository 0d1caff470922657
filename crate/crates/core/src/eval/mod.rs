//! Downstream evaluation: nearest-centroid scoring, the repeated-split
//! accuracy protocol, and sparsity-parameter tuning by repeated two-fold
//! cross-validation.

pub mod mlp;
pub mod pca;

use ndarray::{ArrayBase, Data, Ix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{build_centroid_target, split, Dataset, SplitSpec, Standardizer};
use crate::error::{Error, Result};
use crate::features::{cutoff, rank_features, top_k, DEFAULT_CUTOFF_EPSILON};
use crate::slce::{fit_slce, SlceConfig};

pub use mlp::{fraction_correct, train_mlp, MlpClassifier, MlpConfig};
pub use pca::{pca_embed, PcaEmbedding};

pub const DEFAULT_EVAL_REPEATS: usize = 20;
pub const TUNE_FOLDS: usize = 2;
pub const DEFAULT_TUNE_REPEATS: usize = 10;

/// Repeated-split benchmark configuration: split, fit, select top-K, train
/// the classifier, score; repeated with derived seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub n_repeats: usize,
    pub split: SplitSpec,
    pub top_k_values: Vec<usize>,
    pub base_seed: u64,
    pub standardize: bool,
    pub mlp: MlpConfig,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        EvalProtocol {
            n_repeats: DEFAULT_EVAL_REPEATS,
            split: SplitSpec::new(0.5, 0),
            top_k_values: vec![10, 50],
            base_seed: 0,
            standardize: false,
            mlp: MlpConfig::default(),
        }
    }
}

/// One line of the accuracy table: a feature budget and its scores across
/// repeats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyRow {
    /// "k=10", "k=50", ... or "all".
    pub selector: String,
    pub k: Option<usize>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub per_repeat: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
    pub n_repeats: usize,
    pub base_seed: u64,
}

/// Per-lambda cross-validation summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneRow {
    pub lambda: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// One accuracy per (repeat, fold-direction) cell.
    pub per_cell: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneResult {
    pub chosen_lambda: f64,
    pub rows: Vec<TuneRow>,
    pub n_repeats: usize,
    pub base_seed: u64,
}

/// Tuning request: the lambda grid and the repeated two-fold protocol
/// around it. Fold count is fixed at two.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneSpec {
    pub lambda_grid: Vec<f64>,
    pub n_repeats: usize,
    pub base_seed: u64,
    pub standardize: bool,
}

impl TuneSpec {
    pub fn new(lambda_grid: Vec<f64>, base_seed: u64) -> Self {
        TuneSpec {
            lambda_grid,
            n_repeats: DEFAULT_TUNE_REPEATS,
            base_seed,
            standardize: false,
        }
    }
}

/// Logarithmic default grid over 0.04..0.5.
pub fn default_lambda_grid() -> Vec<f64> {
    let lo: f64 = 0.04;
    let hi: f64 = 0.5;
    let points: i32 = 8;
    let step = (hi / lo).powf(1.0 / f64::from(points - 1));
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                (lo * step.powi(i) * 1e6).round() / 1e6
            }
        })
        .collect()
}

/// Assigns each test column the label of the nearest training-class
/// centroid in Euclidean distance, ties to the smaller label.
pub fn nearest_centroid_predict(
    train: &Dataset,
    test_features: &ArrayBase<impl Data<Elem = f64>, Ix2>,
) -> Result<Vec<usize>> {
    if test_features.nrows() != train.n_features() {
        return Err(Error::Dim(format!(
            "train has {} features, test has {}",
            train.n_features(),
            test_features.nrows()
        )));
    }
    if let Some(missing) = train.class_counts().iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(missing));
    }
    let centroids = build_centroid_target(train).centroids;
    let preds = test_features
        .columns()
        .into_iter()
        .map(|col| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for j in 0..centroids.ncols() {
                let mut dist = 0.0;
                for (a, b) in col.iter().zip(centroids.column(j)) {
                    let e = a - b;
                    dist += e * e;
                }
                if dist < best_d {
                    best_d = dist;
                    best = j;
                }
            }
            best
        })
        .collect();
    Ok(preds)
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Restricts a dataset to sorted feature indices so that selecting all
/// features is the identity.
fn restrict_sorted(ds: &Dataset, indices: &[usize]) -> Result<(Dataset, Vec<usize>)> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    Ok((ds.restrict_features(&sorted)?, sorted))
}

struct RepeatOutcome {
    per_k: Vec<f64>,
    all_features: f64,
}

fn run_one_repeat(
    ds: &Dataset,
    slce_cfg: &SlceConfig,
    protocol: &EvalProtocol,
    repeat: usize,
) -> Result<RepeatOutcome> {
    let seed = protocol.base_seed.wrapping_add(repeat as u64);
    let spec = SplitSpec {
        seed,
        ..protocol.split
    };
    let (train, test) = split(ds, &spec)?;

    let (train, test) = if protocol.standardize {
        let scaler = Standardizer::fit(train.features());
        (
            train.with_features(scaler.transform(train.features())?)?,
            test.with_features(scaler.transform(test.features())?)?,
        )
    } else {
        (train, test)
    };

    let ctilde = build_centroid_target(&train);
    let mut cfg = slce_cfg.clone();
    cfg.lce.init_seed = seed;
    let model = fit_slce(train.features(), &ctilde.targets, &cfg)?;
    let report = rank_features(&model);

    let mlp_cfg = MlpConfig {
        seed,
        ..protocol.mlp.clone()
    };

    let mut per_k = Vec::with_capacity(protocol.top_k_values.len());
    for &k in &protocol.top_k_values {
        let picked = top_k(&report, k)?;
        let (train_k, sorted) = restrict_sorted(&train, &picked)?;
        let test_k = test.restrict_features(&sorted)?;
        let clf = train_mlp(
            train_k.features(),
            train_k.labels(),
            ds.n_classes(),
            &mlp_cfg,
        )?;
        per_k.push(clf.accuracy(test_k.features(), test.labels()));
    }

    let clf = train_mlp(train.features(), train.labels(), ds.n_classes(), &mlp_cfg)?;
    let all_features = clf.accuracy(test.features(), test.labels());

    Ok(RepeatOutcome { per_k, all_features })
}

/// Runs the full repeated-split protocol: for every repeat, split, fit the
/// sparse model on the training half, keep the top-K features, train the
/// classifier on them, and score the test half. An all-features row is
/// always appended. Fully reproducible for a fixed base seed; repeats run
/// in parallel on the current rayon pool.
pub fn evaluate_protocol(
    ds: &Dataset,
    slce_cfg: &SlceConfig,
    protocol: &EvalProtocol,
) -> Result<AccuracyTable> {
    if protocol.n_repeats == 0 {
        return Err(Error::Config("n_repeats must be at least 1".into()));
    }
    let outcomes: Vec<RepeatOutcome> = (0..protocol.n_repeats)
        .into_par_iter()
        .map(|r| run_one_repeat(ds, slce_cfg, protocol, r))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (i, &k) in protocol.top_k_values.iter().enumerate() {
        let scores: Vec<f64> = outcomes.iter().map(|o| o.per_k[i]).collect();
        let (mean, std) = mean_and_std(&scores);
        rows.push(AccuracyRow {
            selector: format!("k={k}"),
            k: Some(k),
            mean_accuracy: mean,
            std_accuracy: std,
            per_repeat: scores,
        });
    }
    let all: Vec<f64> = outcomes.iter().map(|o| o.all_features).collect();
    let (mean, std) = mean_and_std(&all);
    rows.push(AccuracyRow {
        selector: "all".into(),
        k: None,
        mean_accuracy: mean,
        std_accuracy: std,
        per_repeat: all,
    });

    Ok(AccuracyTable {
        rows,
        n_repeats: protocol.n_repeats,
        base_seed: protocol.base_seed,
    })
}

fn score_fold(
    fit_fold: &Dataset,
    score_fold: &Dataset,
    lambda: f64,
    seed: u64,
    slce_cfg: &SlceConfig,
    standardize: bool,
) -> Result<f64> {
    let (fit_fold, score_features) = if standardize {
        let scaler = Standardizer::fit(fit_fold.features());
        (
            fit_fold.with_features(scaler.transform(fit_fold.features())?)?,
            scaler.transform(score_fold.features())?,
        )
    } else {
        (fit_fold.clone(), score_fold.features().clone())
    };

    let ctilde = build_centroid_target(&fit_fold);
    let mut cfg = slce_cfg.clone();
    cfg.lambda = lambda;
    cfg.lce.init_seed = seed;
    let model = fit_slce(fit_fold.features(), &ctilde.targets, &cfg)?;
    let report = cutoff(&rank_features(&model), DEFAULT_CUTOFF_EPSILON);

    let (fit_sel, sorted) = restrict_sorted(&fit_fold, &report.selected)?;
    let score_sel = score_features.select(ndarray::Axis(0), &sorted);
    let preds = nearest_centroid_predict(&fit_sel, &score_sel)?;
    Ok(fraction_correct(&preds, score_fold.labels()))
}

/// Tunes lambda by repeated stratified two-fold cross-validation with
/// nearest-centroid scoring on the cut-off feature set. The winner
/// maximizes mean held-out accuracy; ties go to the larger lambda.
pub fn tune_lambda(
    train: &Dataset,
    spec: &TuneSpec,
    slce_cfg: &SlceConfig,
) -> Result<TuneResult> {
    if spec.lambda_grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    if spec.n_repeats == 0 {
        return Err(Error::Config("tune repeats must be at least 1".into()));
    }
    let mut grid = spec.lambda_grid.clone();
    if grid.iter().any(|l| *l < 0.0) {
        return Err(Error::Config("lambda must be non-negative".into()));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // One shared sequence of fold splits, reused across the grid so the
    // comparison is paired.
    let folds: Vec<(Dataset, Dataset)> = (0..spec.n_repeats)
        .map(|r| {
            let fold_spec = SplitSpec::new(0.5, spec.base_seed.wrapping_add(r as u64));
            split(train, &fold_spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize, bool)> = (0..grid.len())
        .flat_map(|g| {
            (0..spec.n_repeats).flat_map(move |r| [(g, r, false), (g, r, true)])
        })
        .collect();

    let scores: Vec<f64> = cells
        .par_iter()
        .map(|&(g, r, swap)| {
            let (a, b) = &folds[r];
            let (fit_ds, score_ds) = if swap { (b, a) } else { (a, b) };
            score_fold(
                fit_ds,
                score_ds,
                grid[g],
                spec.base_seed.wrapping_add(r as u64),
                slce_cfg,
                spec.standardize,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let per_lambda = 2 * spec.n_repeats;
    let mut rows = Vec::with_capacity(grid.len());
    for (g, &lambda) in grid.iter().enumerate() {
        let cells: Vec<f64> = scores[g * per_lambda..(g + 1) * per_lambda].to_vec();
        let (mean, std) = mean_and_std(&cells);
        rows.push(TuneRow {
            lambda,
            mean_accuracy: mean,
            std_accuracy: std,
            per_cell: cells,
        });
    }

    // Ascending scan with >= so equal accuracies keep the larger lambda.
    let mut chosen = rows[0].lambda;
    let mut best = f64::NEG_INFINITY;
    for row in &rows {
        if row.mean_accuracy >= best {
            best = row.mean_accuracy;
            chosen = row.lambda;
        }
    }

    Ok(TuneResult {
        chosen_lambda: chosen,
        rows,
        n_repeats: spec.n_repeats,
        base_seed: spec.base_seed,
    })
}
