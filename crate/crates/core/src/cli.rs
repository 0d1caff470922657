//! Batch command-line surface: `fit`, `stability`, `tune`, `evaluate`,
//! `embed`. Every command writes its fully resolved configuration
//! (including derived seeds) next to its outputs so runs can be reproduced
//! byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{
    build_centroid_target, load_csv, split_indices, Dataset, LabelColumn, SplitSpec, Standardizer,
};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_protocol, pca_embed, tune_lambda, EvalProtocol, MlpConfig, TuneSpec,
};
use crate::features::{cutoff, rank_features, stability, DEFAULT_CUTOFF_EPSILON};
use crate::lce::LceConfig;
use crate::model_io::{load_slce_model, save_slce_model};
use crate::slce::{fit_slce, SlceConfig};

/// Options shared by every subcommand, after merging CLI flags, the
/// optional config file, and the `SLCE_SEED` fallback.
#[derive(Debug, Clone, Serialize)]
pub struct CommonOpts {
    pub data: PathBuf,
    pub labels: String,
    pub transpose: bool,
    pub standardize: bool,
    pub embed_dim: usize,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
    pub train_fraction: f64,
    pub warmup_iterations: u64,
    pub penalty_iterations: u64,
    pub learning_rate: f64,
    pub convergence_tol: f64,
    pub max_iterations: u64,
}

impl CommonOpts {
    fn load_dataset(&self) -> Result<Dataset> {
        load_csv(&self.data, &LabelColumn::parse(&self.labels), self.transpose)
    }

    fn slce_config(&self, lambda: f64) -> Result<SlceConfig> {
        if lambda < 0.0 {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        Ok(SlceConfig {
            lce: LceConfig {
                embedding_dim: self.embed_dim,
                learning_rate: self.learning_rate,
                convergence_tol: self.convergence_tol,
                max_iterations: self.max_iterations,
                init_seed: self.seed,
                init_scale: 1.0,
            },
            lambda,
            warmup_iterations: self.warmup_iterations,
            penalty_iterations: self.penalty_iterations,
            learning_rate: self.learning_rate,
        })
    }
}

#[derive(Serialize)]
struct ConfigEcho<'a, T: Serialize> {
    command: &'a str,
    config: &'a T,
    derived_seeds: Vec<u64>,
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(path, text.as_bytes())
}

fn prepare_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn echo_config<T: Serialize>(out: &Path, command: &str, config: &T, seeds: Vec<u64>) -> Result<()> {
    write_json(
        &out.join("config_resolved.json"),
        &ConfigEcho {
            command,
            config,
            derived_seeds: seeds,
        },
    )
}

/// Standardizes in place when requested; statistics always come from the
/// matrix being fitted (the training partition of the workflow at hand).
fn maybe_standardize(ds: &Dataset, on: bool) -> Result<Dataset> {
    if !on {
        return Ok(ds.clone());
    }
    let scaler = Standardizer::fit(ds.features());
    ds.with_features(scaler.transform(ds.features())?)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitOpts {
    pub common: CommonOpts,
    pub lambda: f64,
}

/// Trains one sparse model on the whole input file and writes the model,
/// the feature report, and the sparsity/ratio curves.
pub fn cmd_fit(opts: &FitOpts) -> Result<()> {
    let out = &opts.common.out;
    prepare_out_dir(out)?;
    let cfg = opts.common.slce_config(opts.lambda)?;
    let ds = maybe_standardize(&opts.common.load_dataset()?, opts.common.standardize)?;

    let targets = build_centroid_target(&ds);
    let model = fit_slce(ds.features(), &targets.targets, &cfg)?;
    let report = cutoff(&rank_features(&model), DEFAULT_CUTOFF_EPSILON);

    save_slce_model(&model, &cfg, &out.join("model.json"))?;
    write_json(&out.join("feature_report.json"), &report)?;

    let mut sparsity = Vec::new();
    report.write_sparsity_csv(&mut sparsity).map_err(|source| Error::Io {
        path: out.join("sparsity_curve.csv"),
        source,
    })?;
    write_output(&out.join("sparsity_curve.csv"), &sparsity)?;

    let mut ratio = Vec::new();
    report
        .write_ratio_csv(DEFAULT_CUTOFF_EPSILON, &mut ratio)
        .map_err(|source| Error::Io {
            path: out.join("ratio_curve.csv"),
            source,
        })?;
    write_output(&out.join("ratio_curve.csv"), &ratio)?;

    echo_config(out, "fit", opts, vec![opts.common.seed])?;
    println!(
        "fit: {} features, cut-off keeps {} (lambda {})",
        report.n_features(),
        report.cutoff_index,
        opts.lambda
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityOpts {
    pub common: CommonOpts,
    pub lambda: f64,
    pub n_runs: usize,
    /// Reuse the base seed for every run instead of base..base+n.
    pub fixed_seed: bool,
}

/// Fits the model `n_runs` times with derived seeds and reports the
/// multi-run Jaccard statistics of the cut-off feature sets.
pub fn cmd_stability(opts: &StabilityOpts) -> Result<()> {
    if opts.n_runs < 2 {
        return Err(Error::Config("stability requires >= 2 runs".into()));
    }
    let out = &opts.common.out;
    prepare_out_dir(out)?;
    let base_cfg = opts.common.slce_config(opts.lambda)?;
    let ds = maybe_standardize(&opts.common.load_dataset()?, opts.common.standardize)?;
    let targets = build_centroid_target(&ds);

    let seeds: Vec<u64> = (0..opts.n_runs as u64)
        .map(|i| {
            if opts.fixed_seed {
                opts.common.seed
            } else {
                opts.common.seed.wrapping_add(i)
            }
        })
        .collect();

    use rayon::prelude::*;
    let selections: Vec<Vec<usize>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = base_cfg.clone();
            cfg.lce.init_seed = seed;
            let model = fit_slce(ds.features(), &targets.targets, &cfg)?;
            let report = cutoff(&rank_features(&model), DEFAULT_CUTOFF_EPSILON);
            Ok(report.selected)
        })
        .collect::<Result<Vec<_>>>()?;

    let report = stability(&selections)?;
    write_json(&out.join("stability.json"), &report)?;
    echo_config(out, "stability", opts, seeds)?;
    println!(
        "stability: {} runs, jaccard {:.4} (|intersection| {}, |union| {})",
        opts.n_runs, report.jaccard, report.intersection_size, report.union_size
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct TuneOpts {
    pub common: CommonOpts,
    pub grid: Vec<f64>,
    pub repeats: usize,
}

/// Picks lambda by repeated stratified two-fold cross-validation and writes
/// the per-lambda table.
pub fn cmd_tune(opts: &TuneOpts) -> Result<()> {
    let out = &opts.common.out;
    prepare_out_dir(out)?;
    let slce_cfg = opts.common.slce_config(0.0)?;
    let ds = maybe_standardize(&opts.common.load_dataset()?, opts.common.standardize)?;

    let spec = TuneSpec {
        lambda_grid: opts.grid.clone(),
        n_repeats: opts.repeats,
        base_seed: opts.common.seed,
        standardize: false, // already applied above when requested
    };
    let result = tune_lambda(&ds, &spec, &slce_cfg)?;

    write_json(&out.join("tuning.json"), &result)?;
    let mut csv = String::from("lambda,mean_accuracy,std_accuracy\n");
    for row in &result.rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            row.lambda, row.mean_accuracy, row.std_accuracy
        ));
    }
    write_output(&out.join("cv_table.csv"), csv.as_bytes())?;

    let seeds: Vec<u64> = (0..opts.repeats as u64)
        .map(|i| opts.common.seed.wrapping_add(i))
        .collect();
    echo_config(out, "tune", opts, seeds)?;
    println!("tune: chose lambda {}", result.chosen_lambda);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateOpts {
    pub common: CommonOpts,
    pub lambda: f64,
    pub top_k: Vec<usize>,
    pub repeats: usize,
    pub mlp_hidden_units: usize,
    pub mlp_epochs: usize,
    pub mlp_learning_rate: f64,
}

/// Runs the repeated-split accuracy protocol and writes the table as JSON
/// and CSV.
pub fn cmd_evaluate(opts: &EvaluateOpts) -> Result<()> {
    let out = &opts.common.out;
    prepare_out_dir(out)?;
    let slce_cfg = opts.common.slce_config(opts.lambda)?;
    let ds = opts.common.load_dataset()?;

    let protocol = EvalProtocol {
        n_repeats: opts.repeats,
        split: SplitSpec::new(opts.common.train_fraction, opts.common.seed),
        top_k_values: opts.top_k.clone(),
        base_seed: opts.common.seed,
        standardize: opts.common.standardize,
        mlp: MlpConfig {
            hidden_units: opts.mlp_hidden_units,
            epochs: opts.mlp_epochs,
            learning_rate: opts.mlp_learning_rate,
            seed: opts.common.seed,
        },
    };
    let table = evaluate_protocol(&ds, &slce_cfg, &protocol)?;

    write_json(&out.join("accuracy.json"), &table)?;
    let mut csv = String::from("selector,k,mean_accuracy,std_accuracy\n");
    for row in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.selector,
            row.k.map_or(String::from("all"), |k| k.to_string()),
            row.mean_accuracy,
            row.std_accuracy
        ));
    }
    write_output(&out.join("accuracy.csv"), csv.as_bytes())?;

    let seeds: Vec<u64> = (0..opts.repeats as u64)
        .map(|i| opts.common.seed.wrapping_add(i))
        .collect();
    echo_config(out, "evaluate", opts, seeds)?;
    for row in &table.rows {
        println!(
            "evaluate: {} mean accuracy {:.4} (std {:.4})",
            row.selector, row.mean_accuracy, row.std_accuracy
        );
    }
    Ok(())
}

/// Where the feature set for `embed` comes from.
#[derive(Debug, Clone, Serialize)]
pub enum FeatureSource {
    ModelFile(PathBuf),
    Explicit(Vec<usize>),
    FitLambda(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbedOpts {
    pub common: CommonOpts,
    pub source: FeatureSource,
    pub components: usize,
}

#[derive(Serialize)]
struct EmbeddingSummary {
    n_components: usize,
    rank_deficient: bool,
    explained_variance: Vec<f64>,
    selected_features: Vec<usize>,
}

/// Splits the data, picks a feature set (trained model file, explicit list,
/// or a fresh fit), and writes per-sample PCA coordinates for train and
/// test partitions.
pub fn cmd_embed(opts: &EmbedOpts) -> Result<()> {
    let out = &opts.common.out;
    prepare_out_dir(out)?;
    let ds = opts.common.load_dataset()?;

    let spec = SplitSpec::new(opts.common.train_fraction, opts.common.seed);
    let (train_idx, test_idx) = split_indices(&ds, &spec)?;
    let train = ds.restrict_samples(&train_idx)?;
    let test = ds.restrict_samples(&test_idx)?;

    let (train, test) = if opts.common.standardize {
        let scaler = Standardizer::fit(train.features());
        (
            train.with_features(scaler.transform(train.features())?)?,
            test.with_features(scaler.transform(test.features())?)?,
        )
    } else {
        (train, test)
    };

    let mut selected = match &opts.source {
        FeatureSource::ModelFile(path) => {
            let (model, _) = load_slce_model(path)?;
            if model.n_features() != ds.n_features() {
                return Err(Error::Dim(format!(
                    "model has {} features, data has {}",
                    model.n_features(),
                    ds.n_features()
                )));
            }
            cutoff(&rank_features(&model), DEFAULT_CUTOFF_EPSILON).selected
        }
        FeatureSource::Explicit(list) => {
            if list.is_empty() {
                return Err(Error::Config("feature list is empty".into()));
            }
            if let Some(&bad) = list.iter().find(|&&i| i >= ds.n_features()) {
                return Err(Error::Config(format!(
                    "feature index {bad} out of range for d={}",
                    ds.n_features()
                )));
            }
            list.clone()
        }
        FeatureSource::FitLambda(lambda) => {
            let cfg = opts.common.slce_config(*lambda)?;
            let targets = build_centroid_target(&train);
            let model = fit_slce(train.features(), &targets.targets, &cfg)?;
            cutoff(&rank_features(&model), DEFAULT_CUTOFF_EPSILON).selected
        }
    };
    selected.sort_unstable();
    selected.dedup();

    let train_x = train.features().select(ndarray::Axis(0), &selected);
    let test_x = test.features().select(ndarray::Axis(0), &selected);
    let emb = pca_embed(&train_x, &test_x, opts.components)?;

    let mut csv = String::from("sample,split,label");
    for c in 0..emb.n_components {
        csv.push_str(&format!(",c{}", c + 1));
    }
    csv.push('\n');
    for (pos, &sample) in train_idx.iter().enumerate() {
        csv.push_str(&format!("{},train,{}", sample, ds.labels()[sample]));
        for c in 0..emb.n_components {
            csv.push_str(&format!(",{}", emb.train_coords[(pos, c)]));
        }
        csv.push('\n');
    }
    for (pos, &sample) in test_idx.iter().enumerate() {
        csv.push_str(&format!("{},test,{}", sample, ds.labels()[sample]));
        for c in 0..emb.n_components {
            csv.push_str(&format!(",{}", emb.test_coords[(pos, c)]));
        }
        csv.push('\n');
    }
    write_output(&out.join("pca_coords.csv"), csv.as_bytes())?;

    write_json(
        &out.join("embedding.json"),
        &EmbeddingSummary {
            n_components: emb.n_components,
            rank_deficient: emb.rank_deficient,
            explained_variance: emb.explained_variance.clone(),
            selected_features: selected.clone(),
        },
    )?;
    echo_config(out, "embed", opts, vec![opts.common.seed])?;
    println!(
        "embed: {} features -> {} components",
        selected.len(),
        emb.n_components
    );
    Ok(())
}

/// Writes `text` to stderr and returns the exit code for `err`.
pub fn report_error(err: &Error) -> i32 {
    let mut stderr = std::io::stderr();
    let _ = writeln!(stderr, "error: {err}");
    err.exit_code()
}
