#ifndef UAVTRACK_H
#define UAVTRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of an FFI call.
 */
typedef enum UtStatus {
  UT_STATUS_OK = 0,
  UT_STATUS_NULL_POINTER = 1,
  UT_STATUS_INVALID_ARGUMENT = 2,
  UT_STATUS_DIMENSION_MISMATCH = 3,
  UT_STATUS_OUT_OF_BOUNDS = 4,
  UT_STATUS_NON_DISCRIMINATIVE_TEMPLATE = 5,
  UT_STATUS_UNDEFINED_SCORE = 6,
  UT_STATUS_INVALID_TIMESTEP = 7,
  UT_STATUS_INVALID_CONFIG = 8,
  UT_STATUS_PARSE = 9,
  UT_STATUS_IO = 10,
  UT_STATUS_INTERNAL = 11,
} UtStatus;

/**
 * Opaque tracker configuration.
 */
typedef struct UtConfig UtConfig;

/**
 * Opaque tracker.
 */
typedef struct UtTracker UtTracker;

/**
 * Per-frame tracker output. Detection fields are meaningful only when
 * `detected` is non-zero; `template_index` is -1 otherwise.
 */
typedef struct UtFrameResult {
  uint64_t frame_index;
  uint8_t detected;
  double x;
  double y;
  double score;
  int32_t template_index;
  /**
   * Searched window, half-open `[x0, x1) x [y0, y1)`.
   */
  int64_t win_x0;
  int64_t win_y0;
  int64_t win_x1;
  int64_t win_y1;
  uint32_t templates_evaluated;
  int64_t pan_counts;
  int64_t tilt_counts;
  double pan_rad;
  double tilt_rad;
  uint8_t saturated;
} UtFrameResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on this thread.
 */
const char *ut_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ut_version(void);

/**
 * New configuration with default values.
 */
struct UtConfig *ut_config_default(void);

/**
 * Parse `key = value` configuration text into `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UtStatus ut_config_parse(const char *text, struct UtConfig **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards.
 */
void ut_config_free(struct UtConfig *config);

/**
 * Build a tracker from the `roi` of an 8-bit row-major first frame. The
 * frame is not processed; pass it to [`ut_tracker_process`] as well.
 *
 * # Safety
 * `pixels` must hold `width * height` bytes; `config` may be null for
 * defaults; `out` must be writable.
 */
enum UtStatus ut_tracker_new(const struct UtConfig *config,
                             const uint8_t *pixels,
                             size_t width,
                             size_t height,
                             int64_t roi_x,
                             int64_t roi_y,
                             size_t roi_width,
                             size_t roi_height,
                             struct UtTracker **out);

/**
 * Track one 8-bit frame taken at `timestamp` seconds. Timestamps must
 * increase from call to call.
 *
 * # Safety
 * `tracker` must come from [`ut_tracker_new`]; `pixels` must hold
 * `width * height` bytes; `out` must be writable.
 */
enum UtStatus ut_tracker_process(struct UtTracker *tracker,
                                 const uint8_t *pixels,
                                 size_t width,
                                 size_t height,
                                 double timestamp,
                                 struct UtFrameResult *out);

/**
 * # Safety
 * `tracker` must come from this library and not be used afterwards.
 */
void ut_tracker_free(struct UtTracker *tracker);

/**
 * ZMNCC of a `template_width x template_height` template against the
 * region of `image` with top-left corner `(u, v)`. Buffers are row-major
 * doubles in `[0, 255]`.
 *
 * # Safety
 * `image` and `template` must hold the stated number of values; `out` must
 * be writable.
 */
enum UtStatus ut_zmncc(const double *image,
                       size_t image_width,
                       size_t image_height,
                       const double *template_,
                       size_t template_width,
                       size_t template_height,
                       size_t u,
                       size_t v,
                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVTRACK_H */
