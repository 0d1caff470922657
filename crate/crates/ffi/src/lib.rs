//! C ABI for the sparse linear centroid-encoder.
//!
//! Every function returns an [`SlceStatus`]; on anything but
//! `SLCE_STATUS_OK` a human-readable message is available from
//! [`slce_last_error_message`] until the next call on the same thread.
//! Datasets and models are opaque handles owned by the library; release
//! them with the matching `_free` function exactly once.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use slce_core::data::{build_centroid_target, Dataset, LabelColumn, Standardizer};
use slce_core::error::Error;
use slce_core::features::{cutoff, rank_features, DEFAULT_CUTOFF_EPSILON};
use slce_core::lce::LceConfig;
use slce_core::model_io::{load_slce_model, save_slce_model};
use slce_core::slce::{fit_slce, SlceConfig, SlceModel as CoreModel};

/// Result codes for every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Utf8 = 3,
    Io = 4,
    Parse = 5,
    Numeric = 6,
    Panic = 7,
}

/// Opaque dataset handle.
pub struct SlceDataset {
    inner: Dataset,
}

/// Opaque trained-model handle.
pub struct SlceModel {
    model: CoreModel,
    config: SlceConfig,
}

/// Training options for [`slce_fit`]. Obtain defaults from
/// [`slce_fit_options_default`] and override what you need.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlceFitOptions {
    /// l1 penalty weight; larger values select fewer features.
    pub lambda: f64,
    /// Columns of the transformation matrix A.
    pub embedding_dim: usize,
    /// Seed for the initialization of A.
    pub seed: u64,
    /// Gate iterations before the penalty is switched on.
    pub warmup_iterations: u64,
    /// Penalized gate iterations.
    pub penalty_iterations: u64,
    pub learning_rate: f64,
    /// Step-1 stop rule on |cost_t - cost_{t-1}|.
    pub convergence_tol: f64,
    /// Step-1 iteration cap.
    pub max_iterations: u64,
    /// Z-score features (statistics from this dataset) before fitting.
    pub standardize: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> SlceStatus {
    match err {
        Error::Io { .. } => SlceStatus::Io,
        Error::Csv(_)
        | Error::NonNumeric { .. }
        | Error::NonFinite { .. }
        | Error::LabelColumnNotFound(_)
        | Error::Json(_) => SlceStatus::Parse,
        Error::EmptyClass(_)
        | Error::ClassTooSmall { .. }
        | Error::Dim(_)
        | Error::Config(_) => SlceStatus::InvalidArgument,
        Error::Numeric { .. } => SlceStatus::Numeric,
    }
}

fn fail(err: Error) -> SlceStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

fn fail_msg(status: SlceStatus, msg: &str) -> SlceStatus {
    set_last_error(msg.to_string());
    status
}

fn guarded(f: impl FnOnce() -> SlceStatus) -> SlceStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail_msg(SlceStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string.
unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, SlceStatus> {
    if ptr.is_null() {
        return Err(fail_msg(SlceStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail_msg(SlceStatus::Utf8, "string is not valid UTF-8"))
}

/// Message for the most recent failure on this thread, or NULL when the
/// last call succeeded. The pointer stays valid until the next API call on
/// the same thread.
#[no_mangle]
pub extern "C" fn slce_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Fills `out` with the library defaults (lambda 0, k 5, schedule 10+2000,
/// learning rate 0.002).
///
/// # Safety
/// `out` must point to writable memory for one `SlceFitOptions`.
#[no_mangle]
pub unsafe extern "C" fn slce_fit_options_default(out: *mut SlceFitOptions) -> SlceStatus {
    guarded(|| {
        if out.is_null() {
            return fail_msg(SlceStatus::NullPointer, "out is null");
        }
        let cfg = SlceConfig::default();
        *out = SlceFitOptions {
            lambda: cfg.lambda,
            embedding_dim: cfg.lce.embedding_dim,
            seed: cfg.lce.init_seed,
            warmup_iterations: cfg.warmup_iterations,
            penalty_iterations: cfg.penalty_iterations,
            learning_rate: cfg.learning_rate,
            convergence_tol: cfg.lce.convergence_tol,
            max_iterations: cfg.lce.max_iterations,
            standardize: false,
        };
        SlceStatus::Ok
    })
}

/// Loads a CSV file. `label_column` is a header name, a 0-based column
/// index, or "last"; `transpose` says the file stores features as rows.
///
/// # Safety
/// `path` and `label_column` must be valid NUL-terminated strings and `out`
/// a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn slce_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    transpose: bool,
    out: *mut *mut SlceDataset,
) -> SlceStatus {
    guarded(|| {
        if out.is_null() {
            return fail_msg(SlceStatus::NullPointer, "out is null");
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let label = match cstr(label_column) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match slce_core::data::load_csv(Path::new(path), &LabelColumn::parse(label), transpose) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(SlceDataset { inner: ds }));
                SlceStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Wraps a dense column-major matrix: `features[i + j*n_features]` is
/// feature i of sample j. Labels must be integers 0..M-1 with every class
/// present.
///
/// # Safety
/// `features` must point to n_features*n_samples doubles and `labels` to
/// n_samples u32 values; `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn slce_dataset_from_dense(
    features: *const f64,
    n_features: usize,
    n_samples: usize,
    labels: *const u32,
    out: *mut *mut SlceDataset,
) -> SlceStatus {
    guarded(|| {
        if features.is_null() || labels.is_null() || out.is_null() {
            return fail_msg(SlceStatus::NullPointer, "null pointer argument");
        }
        if n_features == 0 || n_samples == 0 {
            return fail_msg(SlceStatus::InvalidArgument, "empty matrix");
        }
        let raw = std::slice::from_raw_parts(features, n_features * n_samples);
        let label_raw = std::slice::from_raw_parts(labels, n_samples);
        // Column-major input matches the internal layout: sample j occupies
        // raw[j*d .. (j+1)*d].
        let mut matrix = ndarray::Array2::<f64>::zeros((n_features, n_samples));
        for j in 0..n_samples {
            for i in 0..n_features {
                matrix[(i, j)] = raw[j * n_features + i];
            }
        }
        let labels: Vec<usize> = label_raw.iter().map(|&l| l as usize).collect();
        match Dataset::new(matrix, labels, None, None) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(SlceDataset { inner: ds }));
                SlceStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reports the dataset shape. Any of the out pointers may be NULL.
///
/// # Safety
/// `ds` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slce_dataset_dims(
    ds: *const SlceDataset,
    n_features: *mut usize,
    n_samples: *mut usize,
    n_classes: *mut usize,
) -> SlceStatus {
    guarded(|| {
        let Some(ds) = ds.as_ref() else {
            return fail_msg(SlceStatus::NullPointer, "dataset is null");
        };
        if !n_features.is_null() {
            *n_features = ds.inner.n_features();
        }
        if !n_samples.is_null() {
            *n_samples = ds.inner.n_samples();
        }
        if !n_classes.is_null() {
            *n_classes = ds.inner.n_classes();
        }
        SlceStatus::Ok
    })
}

/// # Safety
/// `ds` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn slce_dataset_free(ds: *mut SlceDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Runs the two-step fit on the dataset.
///
/// # Safety
/// `ds` must be a live dataset handle, `options` NULL or valid, and `out` a
/// valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn slce_fit(
    ds: *const SlceDataset,
    options: *const SlceFitOptions,
    out: *mut *mut SlceModel,
) -> SlceStatus {
    guarded(|| {
        let Some(ds) = ds.as_ref() else {
            return fail_msg(SlceStatus::NullPointer, "dataset is null");
        };
        if out.is_null() {
            return fail_msg(SlceStatus::NullPointer, "out is null");
        }
        let mut defaults = SlceFitOptions {
            lambda: 0.0,
            embedding_dim: 5,
            seed: 0,
            warmup_iterations: 10,
            penalty_iterations: 2000,
            learning_rate: 0.002,
            convergence_tol: 1e-6,
            max_iterations: 50_000,
            standardize: false,
        };
        if let Some(opts) = options.as_ref() {
            defaults = *opts;
        }
        if defaults.lambda < 0.0 {
            return fail_msg(SlceStatus::InvalidArgument, "lambda must be non-negative");
        }
        let cfg = SlceConfig {
            lce: LceConfig {
                embedding_dim: defaults.embedding_dim,
                learning_rate: defaults.learning_rate,
                convergence_tol: defaults.convergence_tol,
                max_iterations: defaults.max_iterations,
                init_seed: defaults.seed,
                init_scale: 1.0,
            },
            lambda: defaults.lambda,
            warmup_iterations: defaults.warmup_iterations,
            penalty_iterations: defaults.penalty_iterations,
            learning_rate: defaults.learning_rate,
        };

        let fit_input = if defaults.standardize {
            let scaler = Standardizer::fit(ds.inner.features());
            match scaler
                .transform(ds.inner.features())
                .and_then(|f| ds.inner.with_features(f))
            {
                Ok(standardized) => standardized,
                Err(e) => return fail(e),
            }
        } else {
            ds.inner.clone()
        };

        let targets = build_centroid_target(&fit_input);
        match fit_slce(fit_input.features(), &targets.targets, &cfg) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(SlceModel { model, config: cfg }));
                SlceStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `model` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn slce_model_free(model: *mut SlceModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Reports model shape: d and k. Either out pointer may be NULL.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn slce_model_dims(
    model: *const SlceModel,
    n_features: *mut usize,
    embedding_dim: *mut usize,
) -> SlceStatus {
    guarded(|| {
        let Some(m) = model.as_ref() else {
            return fail_msg(SlceStatus::NullPointer, "model is null");
        };
        if !n_features.is_null() {
            *n_features = m.model.n_features();
        }
        if !embedding_dim.is_null() {
            *embedding_dim = m.model.embedding_dim();
        }
        SlceStatus::Ok
    })
}

/// Copies the gate vector (diagonal of B) into `out`, which must hold
/// exactly `len == n_features` doubles.
///
/// # Safety
/// `model` must be live and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn slce_model_gates(
    model: *const SlceModel,
    out: *mut f64,
    len: usize,
) -> SlceStatus {
    guarded(|| {
        let Some(m) = model.as_ref() else {
            return fail_msg(SlceStatus::NullPointer, "model is null");
        };
        if out.is_null() {
            return fail_msg(SlceStatus::NullPointer, "out is null");
        }
        if len != m.model.n_features() {
            return fail_msg(
                SlceStatus::InvalidArgument,
                "buffer length must equal the feature count",
            );
        }
        std::ptr::copy_nonoverlapping(m.model.b.as_ptr(), out, len);
        SlceStatus::Ok
    })
}

/// Ranks features by gate magnitude, applies the consecutive-ratio cut-off
/// (pass `cutoff_epsilon <= 0` for the default), and writes the selected
/// indices. Call with `out_indices == NULL` to query the count first; with
/// a buffer, `capacity` must be at least the count.
///
/// # Safety
/// `model` must be live; `out_indices` NULL or writable for `capacity`
/// values; `out_count` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn slce_model_selected(
    model: *const SlceModel,
    cutoff_epsilon: f64,
    out_indices: *mut usize,
    capacity: usize,
    out_count: *mut usize,
) -> SlceStatus {
    guarded(|| {
        let Some(m) = model.as_ref() else {
            return fail_msg(SlceStatus::NullPointer, "model is null");
        };
        let eps = if cutoff_epsilon > 0.0 {
            cutoff_epsilon
        } else {
            DEFAULT_CUTOFF_EPSILON
        };
        let report = cutoff(&rank_features(&m.model), eps);
        if !out_count.is_null() {
            *out_count = report.cutoff_index;
        }
        if out_indices.is_null() {
            return SlceStatus::Ok;
        }
        if capacity < report.cutoff_index {
            return fail_msg(SlceStatus::InvalidArgument, "capacity too small");
        }
        std::ptr::copy_nonoverlapping(
            report.selected.as_ptr(),
            out_indices,
            report.cutoff_index,
        );
        SlceStatus::Ok
    })
}

/// Serializes the model to a JSON file.
///
/// # Safety
/// `model` must be live and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn slce_model_save_json(
    model: *const SlceModel,
    path: *const c_char,
) -> SlceStatus {
    guarded(|| {
        let Some(m) = model.as_ref() else {
            return fail_msg(SlceStatus::NullPointer, "model is null");
        };
        let path = match cstr(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match save_slce_model(&m.model, &m.config, Path::new(path)) {
            Ok(()) => SlceStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Loads a model previously written by [`slce_model_save_json`] (or the
/// `slce fit` command).
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn slce_model_load_json(
    path: *const c_char,
    out: *mut *mut SlceModel,
) -> SlceStatus {
    guarded(|| {
        if out.is_null() {
            return fail_msg(SlceStatus::NullPointer, "out is null");
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_slce_model(Path::new(path)) {
            Ok((model, config)) => {
                *out = Box::into_raw(Box::new(SlceModel { model, config }));
                SlceStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
