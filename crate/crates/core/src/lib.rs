//! Sparse Linear Centroid-Encoder (SLCE) feature selection.
//!
//! The model reconstructs every sample as its class centroid through a
//! rank-k linear map while an l1-penalized diagonal gate on the input
//! features decides which features matter. Training is two convex steps:
//! first the transformation matrix A is fitted with the gate fixed at
//! identity, then A is frozen and the gate vector b is trained under the
//! penalty. Features are ranked by gate magnitude and retained up to the
//! position where the ratio of consecutive weights peaks.
//!
//! The crate ships the full workflow: CSV ingestion, stratified splitting,
//! the two-step fit, feature ranking and cut-off, multi-run stability
//! statistics, lambda tuning by repeated two-fold cross-validation, a
//! 500-unit ReLU benchmark classifier, and PCA embeddings of selected
//! feature sets. The `slce` binary drives it all from the command line.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod lce;
pub mod model_io;
pub mod optim;
pub mod slce;
pub mod synthetic;

pub use data::{
    build_centroid_target, load_csv, split, split_indices, CentroidTarget, Dataset, LabelColumn,
    SplitSpec, Standardizer,
};
pub use error::{Error, Result};
pub use eval::{
    evaluate_protocol, nearest_centroid_predict, pca_embed, train_mlp, tune_lambda, AccuracyTable,
    EvalProtocol, MlpClassifier, MlpConfig, PcaEmbedding, TuneResult, TuneSpec,
};
pub use features::{
    cutoff, rank_features, rank_gates, stability, top_k, FeatureReport, StabilityReport,
    DEFAULT_CUTOFF_EPSILON,
};
pub use lce::{fit_lce, lce_cost, lce_gradient, LceConfig, LceModel};
pub use model_io::{load_slce_model, save_slce_model};
pub use optim::{finite_diff_gradient, AdamState};
pub use slce::{fit_slce, slce_cost, slce_gate_gradient, SlceConfig, SlceModel};
