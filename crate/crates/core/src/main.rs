use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use slce_core::cli::{
    cmd_embed, cmd_evaluate, cmd_fit, cmd_stability, cmd_tune, report_error, CommonOpts,
    EmbedOpts, EvaluateOpts, FeatureSource, FitOpts, StabilityOpts, TuneOpts,
};
use slce_core::error::{Error, Result};
use slce_core::eval::default_lambda_grid;

/// Sparse Linear Centroid-Encoder feature selection toolkit.
#[derive(Parser)]
#[command(name = "slce", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one sparse model and write it with its feature report and curves.
    Fit(FitArgs),
    /// Fit several times with derived seeds and report feature-set overlap.
    Stability(StabilityArgs),
    /// Pick lambda by repeated two-fold cross-validation on a grid.
    Tune(TuneArgs),
    /// Repeated-split top-K classification benchmark.
    Evaluate(EvaluateArgs),
    /// PCA coordinates of train/test samples on a selected feature set.
    Embed(EmbedArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input CSV (samples as rows unless --transpose).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Label column: a header name, a 0-based index, or "last".
    #[arg(long)]
    labels: Option<String>,
    /// The file stores features as rows and samples as columns.
    #[arg(long)]
    transpose: bool,
    /// Per-feature z-scoring with training-partition statistics.
    #[arg(long)]
    standardize: bool,
    /// Embedding dimension k.
    #[arg(long, value_name = "K")]
    embed_dim: Option<usize>,
    /// Base RNG seed (falls back to config file, then $SLCE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for repeats and CV cells.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Number of seeded runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Use the same seed for every run instead of base..base+runs.
    #[arg(long)]
    fixed_seed: bool,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated lambda grid (default: log-spaced 0.04..0.5).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid: Option<Vec<f64>>,
    /// Cross-validation repeats.
    #[arg(long)]
    repeats: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Comma-separated feature budgets.
    #[arg(long, value_delimiter = ',')]
    top_k: Option<Vec<usize>>,
    /// Number of split/fit/score repeats.
    #[arg(long)]
    repeats: Option<usize>,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Take the feature set from a trained model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Explicit comma-separated feature indices.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<usize>>,
    /// Fit a fresh model at this lambda on the training half.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Number of principal components.
    #[arg(long)]
    components: Option<usize>,
}

/// Config-file counterpart of the CLI flags; any subset may be present.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    data: Option<PathBuf>,
    labels: Option<String>,
    transpose: Option<bool>,
    standardize: Option<bool>,
    embed_dim: Option<usize>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    lambda: Option<f64>,
    runs: Option<usize>,
    fixed_seed: Option<bool>,
    grid: Option<Vec<f64>>,
    repeats: Option<usize>,
    top_k: Option<Vec<usize>>,
    model: Option<PathBuf>,
    features: Option<Vec<usize>>,
    components: Option<usize>,
    train_fraction: Option<f64>,
    warmup_iterations: Option<u64>,
    penalty_iterations: Option<u64>,
    learning_rate: Option<f64>,
    convergence_tol: Option<f64>,
    max_iterations: Option<u64>,
    mlp_hidden_units: Option<usize>,
    mlp_epochs: Option<usize>,
    mlp_learning_rate: Option<f64>,
}

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("SLCE_SEED").ok().and_then(|s| s.parse().ok())
}

fn resolve_common(args: &CommonArgs, file: &FileConfig) -> Result<CommonOpts> {
    let data = args
        .data
        .clone()
        .or_else(|| file.data.clone())
        .ok_or_else(|| Error::Config("--data is required".into()))?;
    let opts = CommonOpts {
        data,
        labels: args
            .labels
            .clone()
            .or_else(|| file.labels.clone())
            .unwrap_or_else(|| "last".into()),
        transpose: args.transpose || file.transpose.unwrap_or(false),
        standardize: args.standardize || file.standardize.unwrap_or(false),
        embed_dim: args.embed_dim.or(file.embed_dim).unwrap_or(5),
        seed: args.seed.or(file.seed).or_else(env_seed).unwrap_or(0),
        jobs: args.jobs.or(file.jobs).unwrap_or(1),
        out: args
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from("slce_out")),
        train_fraction: file.train_fraction.unwrap_or(0.5),
        warmup_iterations: file.warmup_iterations.unwrap_or(10),
        penalty_iterations: file.penalty_iterations.unwrap_or(2000),
        learning_rate: file.learning_rate.unwrap_or(0.002),
        convergence_tol: file.convergence_tol.unwrap_or(1e-6),
        max_iterations: file.max_iterations.unwrap_or(50_000),
    };
    if opts.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    Ok(opts)
}

fn require_lambda(cli: Option<f64>, file: &FileConfig) -> Result<f64> {
    let lambda = cli
        .or(file.lambda)
        .ok_or_else(|| Error::Config("--lambda is required".into()))?;
    if lambda < 0.0 {
        return Err(Error::Config("lambda must be non-negative".into()));
    }
    Ok(lambda)
}

fn init_thread_pool(jobs: usize) {
    // Ignore the error from double initialization (tests call main logic
    // repeatedly in one process).
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => {
            let file = FileConfig::load(args.common.config.as_ref())?;
            let common = resolve_common(&args.common, &file)?;
            init_thread_pool(common.jobs);
            cmd_fit(&FitOpts {
                lambda: require_lambda(args.lambda, &file)?,
                common,
            })
        }
        Command::Stability(args) => {
            let file = FileConfig::load(args.common.config.as_ref())?;
            let common = resolve_common(&args.common, &file)?;
            init_thread_pool(common.jobs);
            cmd_stability(&StabilityOpts {
                lambda: require_lambda(args.lambda, &file)?,
                n_runs: args.runs.or(file.runs).unwrap_or(5),
                fixed_seed: args.fixed_seed || file.fixed_seed.unwrap_or(false),
                common,
            })
        }
        Command::Tune(args) => {
            let file = FileConfig::load(args.common.config.as_ref())?;
            let common = resolve_common(&args.common, &file)?;
            init_thread_pool(common.jobs);
            let grid = args
                .grid
                .clone()
                .or_else(|| file.grid.clone())
                .unwrap_or_else(default_lambda_grid);
            if grid.iter().any(|l| *l < 0.0) {
                return Err(Error::Config("lambda must be non-negative".into()));
            }
            cmd_tune(&TuneOpts {
                grid,
                repeats: args.repeats.or(file.repeats).unwrap_or(10),
                common,
            })
        }
        Command::Evaluate(args) => {
            let file = FileConfig::load(args.common.config.as_ref())?;
            let common = resolve_common(&args.common, &file)?;
            init_thread_pool(common.jobs);
            cmd_evaluate(&EvaluateOpts {
                lambda: require_lambda(args.lambda, &file)?,
                top_k: args
                    .top_k
                    .clone()
                    .or_else(|| file.top_k.clone())
                    .unwrap_or_else(|| vec![10, 50]),
                repeats: args.repeats.or(file.repeats).unwrap_or(20),
                mlp_hidden_units: file.mlp_hidden_units.unwrap_or(500),
                mlp_epochs: file.mlp_epochs.unwrap_or(200),
                mlp_learning_rate: file.mlp_learning_rate.unwrap_or(0.001),
                common,
            })
        }
        Command::Embed(args) => {
            let file = FileConfig::load(args.common.config.as_ref())?;
            let common = resolve_common(&args.common, &file)?;
            init_thread_pool(common.jobs);
            let model = args.model.clone().or_else(|| file.model.clone());
            let features = args.features.clone().or_else(|| file.features.clone());
            let lambda = args.lambda.or(file.lambda);
            let source = match (model, features, lambda) {
                (Some(path), None, None) => FeatureSource::ModelFile(path),
                (None, Some(list), None) => FeatureSource::Explicit(list),
                (None, None, Some(l)) => {
                    if l < 0.0 {
                        return Err(Error::Config("lambda must be non-negative".into()));
                    }
                    FeatureSource::FitLambda(l)
                }
                _ => {
                    return Err(Error::Config(
                        "embed needs exactly one of --model, --features, --lambda".into(),
                    ))
                }
            };
            cmd_embed(&EmbedOpts {
                source,
                components: args.components.or(file.components).unwrap_or(3),
                common,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(report_error(&e) as u8),
    }
}
