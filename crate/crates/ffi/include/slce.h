/* C ABI for the sparse linear centroid-encoder feature-selection library. */

#ifndef SLCE_H
#define SLCE_H

/* Generated by cbindgen from slce-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes for every API call.
typedef enum SlceStatus {
  SLCE_STATUS_OK = 0,
  SLCE_STATUS_NULL_POINTER = 1,
  SLCE_STATUS_INVALID_ARGUMENT = 2,
  SLCE_STATUS_UTF8 = 3,
  SLCE_STATUS_IO = 4,
  SLCE_STATUS_PARSE = 5,
  SLCE_STATUS_NUMERIC = 6,
  SLCE_STATUS_PANIC = 7,
} SlceStatus;

// Opaque dataset handle.
typedef struct SlceDataset SlceDataset;

// Opaque trained-model handle.
typedef struct SlceModel SlceModel;

// Training options for [`slce_fit`]. Obtain defaults from
// [`slce_fit_options_default`] and override what you need.
typedef struct SlceFitOptions {
  // l1 penalty weight; larger values select fewer features.
  double lambda;
  // Columns of the transformation matrix A.
  size_t embedding_dim;
  // Seed for the initialization of A.
  uint64_t seed;
  // Gate iterations before the penalty is switched on.
  uint64_t warmup_iterations;
  // Penalized gate iterations.
  uint64_t penalty_iterations;
  double learning_rate;
  // Step-1 stop rule on |cost_t - cost_{t-1}|.
  double convergence_tol;
  // Step-1 iteration cap.
  uint64_t max_iterations;
  // Z-score features (statistics from this dataset) before fitting.
  bool standardize;
} SlceFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL when the
// last call succeeded. The pointer stays valid until the next API call on
// the same thread.
const char *slce_last_error_message(void);

// Fills `out` with the library defaults (lambda 0, k 5, schedule 10+2000,
// learning rate 0.002).
//
// # Safety
// `out` must point to writable memory for one `SlceFitOptions`.
enum SlceStatus slce_fit_options_default(struct SlceFitOptions *out);

// Loads a CSV file. `label_column` is a header name, a 0-based column
// index, or "last"; `transpose` says the file stores features as rows.
//
// # Safety
// `path` and `label_column` must be valid NUL-terminated strings and `out`
// a valid destination pointer.
enum SlceStatus slce_dataset_load_csv(const char *path,
                                      const char *label_column,
                                      bool transpose,
                                      struct SlceDataset **out);

// Wraps a dense column-major matrix: `features[i + j*n_features]` is
// feature i of sample j. Labels must be integers 0..M-1 with every class
// present.
//
// # Safety
// `features` must point to n_features*n_samples doubles and `labels` to
// n_samples u32 values; `out` must be a valid destination pointer.
enum SlceStatus slce_dataset_from_dense(const double *features,
                                        size_t n_features,
                                        size_t n_samples,
                                        const uint32_t *labels,
                                        struct SlceDataset **out);

// Reports the dataset shape. Any of the out pointers may be NULL.
//
// # Safety
// `ds` must be a live handle from this library.
enum SlceStatus slce_dataset_dims(const struct SlceDataset *ds,
                                  size_t *n_features,
                                  size_t *n_samples,
                                  size_t *n_classes);

// # Safety
// `ds` must come from this library and not have been freed already.
void slce_dataset_free(struct SlceDataset *ds);

// Runs the two-step fit on the dataset.
//
// # Safety
// `ds` must be a live dataset handle, `options` NULL or valid, and `out` a
// valid destination pointer.
enum SlceStatus slce_fit(const struct SlceDataset *ds,
                         const struct SlceFitOptions *options,
                         struct SlceModel **out);

// # Safety
// `model` must come from this library and not have been freed already.
void slce_model_free(struct SlceModel *model);

// Reports model shape: d and k. Either out pointer may be NULL.
//
// # Safety
// `model` must be a live handle.
enum SlceStatus slce_model_dims(const struct SlceModel *model,
                                size_t *n_features,
                                size_t *embedding_dim);

// Copies the gate vector (diagonal of B) into `out`, which must hold
// exactly `len == n_features` doubles.
//
// # Safety
// `model` must be live and `out` writable for `len` doubles.
enum SlceStatus slce_model_gates(const struct SlceModel *model, double *out, size_t len);

// Ranks features by gate magnitude, applies the consecutive-ratio cut-off
// (pass `cutoff_epsilon <= 0` for the default), and writes the selected
// indices. Call with `out_indices == NULL` to query the count first; with
// a buffer, `capacity` must be at least the count.
//
// # Safety
// `model` must be live; `out_indices` NULL or writable for `capacity`
// values; `out_count` NULL or writable.
enum SlceStatus slce_model_selected(const struct SlceModel *model,
                                    double cutoff_epsilon,
                                    size_t *out_indices,
                                    size_t capacity,
                                    size_t *out_count);

// Serializes the model to a JSON file.
//
// # Safety
// `model` must be live and `path` a valid NUL-terminated string.
enum SlceStatus slce_model_save_json(const struct SlceModel *model, const char *path);

// Loads a model previously written by [`slce_model_save_json`] (or the
// `slce fit` command).
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid
// destination pointer.
enum SlceStatus slce_model_load_json(const char *path, struct SlceModel **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLCE_H */
