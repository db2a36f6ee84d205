/* C interface to the quditron single-qudit classifier. */

#ifndef QUDITRON_H
#define QUDITRON_H

/* Generated by cbindgen from quditron-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of an FFI call.
 */
typedef enum QuditronStatus {
  QUDITRON_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QUDITRON_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  QUDITRON_STATUS_INVALID_UTF8 = 2,
  /**
   * File could not be read or written.
   */
  QUDITRON_STATUS_IO = 3,
  /**
   * Model JSON failed to parse or validate.
   */
  QUDITRON_STATUS_PARSE = 4,
  /**
   * A buffer length did not match the model's dimensions.
   */
  QUDITRON_STATUS_DIMENSION = 5,
  /**
   * Any other internal failure.
   */
  QUDITRON_STATUS_INTERNAL = 6,
} QuditronStatus;

/**
 * Opaque trained-model handle.
 */
typedef struct QuditronModel QuditronModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *quditron_version(void);

/**
 * Static human-readable description of a status code.
 */
const char *quditron_status_message(enum QuditronStatus status);

/**
 * Loads a model from a JSON file written by `quditron train`.
 *
 * # Safety
 * `path` must point to a NUL-terminated string and `out_model` to a
 * writable pointer slot. On success the slot receives a handle that must
 * be released with [`quditron_model_free`].
 */
enum QuditronStatus quditron_model_load(const char *path, struct QuditronModel **out_model);

/**
 * Parses a model from an in-memory JSON document.
 *
 * # Safety
 * As for [`quditron_model_load`], with `json` NUL-terminated.
 */
enum QuditronStatus quditron_model_from_json(const char *json, struct QuditronModel **out_model);

/**
 * Writes the model back to a JSON file.
 *
 * # Safety
 * `model` must be a live handle from a load call; `path` NUL-terminated.
 */
enum QuditronStatus quditron_model_save(const struct QuditronModel *model, const char *path);

/**
 * Releases a model handle. Accepts null.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void quditron_model_free(struct QuditronModel *model);

/**
 * Number of classes (the qudit dimension d). Zero for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t quditron_model_classes(const struct QuditronModel *model);

/**
 * Raw input length the model expects (pixels per image). Zero for null.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t quditron_model_input_dim(const struct QuditronModel *model);

/**
 * Classifies one feature row of `len` doubles; writes the class label.
 *
 * # Safety
 * `features` must point to `len` readable doubles and `out_label` to a
 * writable slot; `model` must be a live handle.
 */
enum QuditronStatus quditron_predict(const struct QuditronModel *model,
                                     const double *features,
                                     size_t len,
                                     int64_t *out_label);

/**
 * Classifies `count` rows stored row-major in one buffer.
 *
 * # Safety
 * `features` must hold `count * len` doubles; `out_labels` must hold
 * `count` writable slots; `model` must be a live handle.
 */
enum QuditronStatus quditron_predict_batch(const struct QuditronModel *model,
                                           const double *features,
                                           size_t count,
                                           size_t len,
                                           int64_t *out_labels);

/**
 * Outcome probabilities for one row: writes `d` labels and their
 * probabilities in outcome order (probabilities sum to 1).
 *
 * # Safety
 * `features` must hold `len` doubles; `out_labels` and `out_probs` must
 * hold `d` writable slots each (`d` from [`quditron_model_classes`]);
 * `model` must be a live handle.
 */
enum QuditronStatus quditron_predict_proba(const struct QuditronModel *model,
                                           const double *features,
                                           size_t len,
                                           int64_t *out_labels,
                                           double *out_probs,
                                           size_t d);

/**
 * Serializes the model to a newly allocated NUL-terminated JSON string;
 * free it with [`quditron_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out_json` a writable pointer slot.
 */
enum QuditronStatus quditron_model_to_json(const struct QuditronModel *model, char **out_json);

/**
 * Frees a string allocated by this library. Accepts null.
 *
 * # Safety
 * `s` must be null or a string returned by [`quditron_model_to_json`],
 * not yet freed.
 */
void quditron_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUDITRON_H */
