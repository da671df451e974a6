#ifndef TACTILE_H
#define TACTILE_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define TACTILE_TASK_TEXTURE 0

#define TACTILE_TASK_STIFFNESS 1

#define TACTILE_MODE_FC 0

#define TACTILE_MODE_AC 1

#define TACTILE_MODEL_KNN 0

#define TACTILE_MODEL_SVM_LINEAR 1

#define TACTILE_MODEL_SVM_RBF 2

#define TACTILE_MODEL_DTREE 3

/**
 * Number of texture features for the default window.
 */
#define TACTILE_TEXTURE_FEATURES 91

/**
 * Number of stiffness features: slope, intercept, r.
 */
#define TACTILE_STIFFNESS_FEATURES 3

/**
 * Result code of every fallible call.
 */
typedef enum TactileStatus {
  TACTILE_STATUS_OK = 0,
  TACTILE_STATUS_NULL_POINTER = 1,
  TACTILE_STATUS_INVALID_ARGUMENT = 2,
  TACTILE_STATUS_BUFFER_TOO_SMALL = 3,
  /**
   * The input data could not be processed (too short, single class, ...).
   */
  TACTILE_STATUS_DATA_ERROR = 4,
  TACTILE_STATUS_PANIC = 5,
} TactileStatus;

/**
 * Labelled feature rows collected before training or evaluation.
 */
typedef struct TactileDataset TactileDataset;

/**
 * A trained, standardised classifier.
 */
typedef struct TactileModel TactileModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tactile_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tactile_version(void);

/**
 * Texture features (DFT magnitudes of the cropped, zero-meaned window).
 *
 * `*written` receives the feature count even when the buffer is too small.
 *
 * # Safety
 * `samples` must point to `n` doubles and `out` to `out_len` doubles.
 */
enum TactileStatus tactile_texture_features(const double *samples,
                                            uintptr_t n,
                                            double fs_hz,
                                            double *out,
                                            uintptr_t out_len,
                                            uintptr_t *written);

/**
 * Hold-phase regression features `[slope, intercept, r]` of a tap trace.
 *
 * # Safety
 * `samples` must point to `n` doubles and `out` to at least 3 doubles.
 */
enum TactileStatus tactile_stiffness_features(const double *samples,
                                              uintptr_t n,
                                              double fs_hz,
                                              double *out);

/**
 * Two-sided Wilcoxon rank-sum p-value.
 *
 * # Safety
 * `a` and `b` must point to `na` and `nb` doubles; `p` must be writable.
 */
enum TactileStatus tactile_rank_sum_p(const double *a,
                                      uintptr_t na,
                                      const double *b,
                                      uintptr_t nb,
                                      double *p);

/**
 * Simulates one trial of preset class `class_index` (in label order) with the
 * default simulator settings.
 *
 * # Safety
 * `out` must point to `out_len` doubles; `written` may be null.
 */
enum TactileStatus tactile_simulate_trial(int32_t task,
                                          int32_t mode,
                                          uintptr_t class_index,
                                          uint64_t seed,
                                          double *out,
                                          uintptr_t out_len,
                                          uintptr_t *written);

/**
 * Copies the name of class `ordinal` of `task` into `buf` (NUL-terminated).
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes.
 */
enum TactileStatus tactile_label_name(int32_t task,
                                      uintptr_t ordinal,
                                      char *buf,
                                      uintptr_t buf_len);

/**
 * New empty dataset, or null on invalid codes (see `tactile_last_error`).
 */
struct TactileDataset *tactile_dataset_new(int32_t task, int32_t mode, uintptr_t n_features);

/**
 * Appends one row with a label name from the dataset's task.
 *
 * # Safety
 * `ds` must come from `tactile_dataset_new`; `values` must point to
 * `n_features` doubles; `label` must be a NUL-terminated string.
 */
enum TactileStatus tactile_dataset_push(struct TactileDataset *ds,
                                        const double *values,
                                        uintptr_t n_features,
                                        const char *label);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or come from `tactile_dataset_new`.
 */
uintptr_t tactile_dataset_len(const struct TactileDataset *ds);

/**
 * # Safety
 * `ds` must be null or come from `tactile_dataset_new`, and not be used again.
 */
void tactile_dataset_free(struct TactileDataset *ds);

/**
 * Repeated stratified k-fold cross-validation; writes the mean accuracy.
 *
 * # Safety
 * `ds` must come from `tactile_dataset_new`; `mean_accuracy` must be writable.
 */
enum TactileStatus tactile_cross_validate(const struct TactileDataset *ds,
                                          int32_t model,
                                          uintptr_t k,
                                          uintptr_t runs,
                                          uint64_t seed,
                                          double *mean_accuracy);

/**
 * Trains a standardised model on every row of `ds`.
 *
 * # Safety
 * `ds` must come from `tactile_dataset_new`; `out` must be writable.
 */
enum TactileStatus tactile_model_fit(const struct TactileDataset *ds,
                                     int32_t model,
                                     struct TactileModel **out);

/**
 * Predicts one row; writes the class ordinal (see `tactile_label_name`).
 *
 * # Safety
 * `model` must come from `tactile_model_fit`; `x` must point to `n` doubles.
 */
enum TactileStatus tactile_model_predict(const struct TactileModel *model,
                                         const double *x,
                                         uintptr_t n,
                                         uintptr_t *ordinal);

/**
 * # Safety
 * `model` must be null or come from `tactile_model_fit`, and not be used again.
 */
void tactile_model_free(struct TactileModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TACTILE_H */
