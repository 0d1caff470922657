//! JSON model files. Matrices are stored as row-major flat arrays with
//! explicit dimensions.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lce::{LceConfig, LceModel};
use crate::slce::{SlceConfig, SlceModel};

pub const LCE_FORMAT: &str = "lce-model";
pub const SLCE_FORMAT: &str = "slce-model";
pub const FORMAT_VERSION: u32 = 1;

/// Row-major matrix payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Array2<f64>> for MatrixJson {
    fn from(m: &Array2<f64>) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.iter().copied().collect(),
        }
    }
}

impl MatrixJson {
    pub fn into_array(self) -> Result<Array2<f64>> {
        Array2::from_shape_vec((self.rows, self.cols), self.data)
            .map_err(|e| Error::Dim(format!("matrix payload: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LceModelFile {
    pub format: String,
    pub version: u32,
    pub a: MatrixJson,
    pub k: usize,
    pub seed: u64,
    pub config: LceConfig,
    pub cost_trace: Vec<f64>,
    pub converged: bool,
    pub iterations_run: u64,
}

/// Step-1 summary embedded in the sparse-model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LceSummary {
    pub converged: bool,
    pub iterations_run: u64,
    pub cost_trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlceModelFile {
    pub format: String,
    pub version: u32,
    pub a: MatrixJson,
    pub k: usize,
    pub seed: u64,
    pub config: SlceConfig,
    pub cost_trace: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub warmup_iterations: u64,
    pub penalty_iterations: u64,
    pub lce: LceSummary,
}

impl LceModelFile {
    pub fn new(model: &LceModel, cfg: &LceConfig) -> Self {
        LceModelFile {
            format: LCE_FORMAT.into(),
            version: FORMAT_VERSION,
            a: (&model.a).into(),
            k: model.embedding_dim,
            seed: cfg.init_seed,
            config: cfg.clone(),
            cost_trace: model.cost_trace.clone(),
            converged: model.converged,
            iterations_run: model.iterations_run,
        }
    }
}

impl SlceModelFile {
    pub fn new(model: &SlceModel, cfg: &SlceConfig) -> Self {
        SlceModelFile {
            format: SLCE_FORMAT.into(),
            version: FORMAT_VERSION,
            a: (&model.a).into(),
            k: model.a.ncols(),
            seed: model.seed,
            config: cfg.clone(),
            cost_trace: model.cost_trace.clone(),
            b: model.b.clone(),
            lambda: model.lambda,
            warmup_iterations: model.warmup_iterations,
            penalty_iterations: model.penalty_iterations,
            lce: LceSummary {
                converged: model.lce_converged,
                iterations_run: model.lce_iterations,
                cost_trace: model.lce_cost_trace.clone(),
            },
        }
    }

    pub fn into_model(self) -> Result<(SlceModel, SlceConfig)> {
        if self.format != SLCE_FORMAT {
            return Err(Error::Config(format!(
                "expected a {SLCE_FORMAT} file, got format {:?}",
                self.format
            )));
        }
        let a = self.a.into_array()?;
        if self.b.len() != a.nrows() {
            return Err(Error::Dim(format!(
                "gate length {} for A with {} rows",
                self.b.len(),
                a.nrows()
            )));
        }
        Ok((
            SlceModel {
                a,
                b: self.b,
                lambda: self.lambda,
                warmup_iterations: self.warmup_iterations,
                penalty_iterations: self.penalty_iterations,
                cost_trace: self.cost_trace,
                seed: self.seed,
                lce_converged: self.lce.converged,
                lce_iterations: self.lce.iterations_run,
                lce_cost_trace: self.lce.cost_trace,
            },
            self.config,
        ))
    }
}

pub fn save_slce_model(model: &SlceModel, cfg: &SlceConfig, path: &Path) -> Result<()> {
    let file = SlceModelFile::new(model, cfg);
    let json = serde_json::to_string_pretty(&file)?;
    fs::write(path, json).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_slce_model(path: &Path) -> Result<(SlceModel, SlceConfig)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: SlceModelFile = serde_json::from_str(&text)?;
    file.into_model()
}

pub fn save_lce_model(model: &LceModel, cfg: &LceConfig, path: &Path) -> Result<()> {
    let file = LceModelFile::new(model, cfg);
    let json = serde_json::to_string_pretty(&file)?;
    fs::write(path, json).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_lce_model(path: &Path) -> Result<(LceModel, LceConfig)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: LceModelFile = serde_json::from_str(&text)?;
    if file.format != LCE_FORMAT {
        return Err(Error::Config(format!(
            "expected a {LCE_FORMAT} file, got format {:?}",
            file.format
        )));
    }
    Ok((
        LceModel {
            a: file.a.into_array()?,
            embedding_dim: file.k,
            cost_trace: file.cost_trace,
            converged: file.converged,
            iterations_run: file.iterations_run,
        },
        file.config,
    ))
}
