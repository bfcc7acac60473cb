#ifndef SIZER_H
#define SIZER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SIZER_FORMAT_CSV 1

#define SIZER_FORMAT_PPM 2

#define SIZER_FORMAT_SVG 4

typedef enum SizerMode {
  SIZER_MODE_DENSITY = 0,
  SIZER_MODE_HAZARD = 1,
  SIZER_MODE_CENSORED_DENSITY = 2,
  SIZER_MODE_CENSORED_HAZARD = 3,
} SizerMode;

typedef enum SizerRule {
  SIZER_RULE_INDEPENDENT_BLOCKS = 0,
  SIZER_RULE_POINTWISE = 1,
} SizerRule;

typedef enum SizerConvention {
  SIZER_CONVENTION_LEFT_LIMIT = 0,
  SIZER_CONVENTION_PAPER_EXACT = 1,
} SizerConvention;

// Result code of every fallible call.
typedef enum SizerStatus {
  SIZER_STATUS_OK = 0,
  SIZER_STATUS_NULL_POINTER = 1,
  SIZER_STATUS_INVALID_ARGUMENT = 2,
  SIZER_STATUS_INVALID_SAMPLE = 3,
  SIZER_STATUS_CENSORED_INPUT = 4,
  SIZER_STATUS_ZERO_WEIGHTS = 5,
  SIZER_STATUS_INVALID_GRID = 6,
  SIZER_STATUS_OUT_OF_RANGE = 7,
  SIZER_STATUS_BUFFER_TOO_SMALL = 8,
  SIZER_STATUS_IO = 9,
  SIZER_STATUS_PANIC = 10,
} SizerStatus;

// Which family matrix to copy out.
typedef enum SizerQuantity {
  SIZER_QUANTITY_ESTIMATE = 0,
  SIZER_QUANTITY_DERIVATIVE = 1,
  SIZER_QUANTITY_SD = 2,
  SIZER_QUANTITY_ESS = 3,
} SizerQuantity;

// Opaque analysis result.
typedef struct SizerAnalysis SizerAnalysis;

// Opaque survival sample.
typedef struct SizerSample SizerSample;

// Run parameters. Obtain defaults from [`sizer_config_default`].
typedef struct SizerConfig {
  enum SizerMode mode;
  size_t grid_points;
  size_t bandwidth_count;
  double alpha;
  double ess_threshold;
  enum SizerRule rule;
  enum SizerConvention convention;
  // Lower clamp for the grid; NaN selects the mode default.
  double support_floor;
} SizerConfig;

typedef struct SizerDirectEstimate {
  double estimate;
  double derivative;
  double sd;
  double ess;
} SizerDirectEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *sizer_last_error_message(void);

struct SizerConfig sizer_config_default(void);

// Builds a sample from `n` times and event flags (nonzero = observed death).
//
// # Safety
// `times` and `events` must each be valid for `n` reads; `out` must be
// valid for one write.
enum SizerStatus sizer_sample_new(const double *times,
                                  const uint8_t *events,
                                  size_t n,
                                  struct SizerSample **out);

// # Safety
// `sample` must come from [`sizer_sample_new`] and not be freed already.
void sizer_sample_free(struct SizerSample *sample);

// Number of observations, or 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle.
size_t sizer_sample_len(const struct SizerSample *sample);

// # Safety
// `sample` must be null or a live handle.
size_t sizer_sample_events(const struct SizerSample *sample);

// Builds the family and the map.
//
// # Safety
// `sample` must be a live handle, `config` valid for one read and `out`
// valid for one write.
enum SizerStatus sizer_analyze(const struct SizerSample *sample,
                               const struct SizerConfig *config,
                               struct SizerAnalysis **out);

// # Safety
// `analysis` must come from [`sizer_analyze`] and not be freed already.
void sizer_analysis_free(struct SizerAnalysis *analysis);

// Number of bandwidths (`rows`) and grid points (`cols`).
//
// # Safety
// `analysis` must be a live handle; `rows` and `cols` valid for one write.
enum SizerStatus sizer_analysis_dims(const struct SizerAnalysis *analysis,
                                     size_t *rows,
                                     size_t *cols);

// Copies the `cols` grid points.
//
// # Safety
// `analysis` must be a live handle and `out` valid for `len` writes.
enum SizerStatus sizer_analysis_grid(const struct SizerAnalysis *analysis, double *out, size_t len);

// Copies the `rows` bandwidths, increasing.
//
// # Safety
// `analysis` must be a live handle and `out` valid for `len` writes.
enum SizerStatus sizer_analysis_bandwidths(const struct SizerAnalysis *analysis,
                                           double *out,
                                           size_t len);

// Copies one `rows × cols` family matrix.
//
// # Safety
// `analysis` must be a live handle and `out` valid for `len` writes.
enum SizerStatus sizer_analysis_matrix(const struct SizerAnalysis *analysis,
                                       enum SizerQuantity quantity,
                                       double *out,
                                       size_t len);

// Copies the `rows × cols` pixel codes (0 sparse, 1 flat, 2 increase, 3 decrease).
//
// # Safety
// `analysis` must be a live handle and `out` valid for `len` writes.
enum SizerStatus sizer_analysis_pixels(const struct SizerAnalysis *analysis,
                                       uint8_t *out,
                                       size_t len);

// Copies the `rows` per-bandwidth critical values.
//
// # Safety
// `analysis` must be a live handle and `out` valid for `len` writes.
enum SizerStatus sizer_analysis_quantiles(const struct SizerAnalysis *analysis,
                                          double *out,
                                          size_t len);

// Writes output files into `out_dir`. `formats` is a bitwise OR of the
// `SIZER_FORMAT_*` flags.
//
// # Safety
// `analysis` must be a live handle and `out_dir` a NUL-terminated string.
enum SizerStatus sizer_analysis_write(const struct SizerAnalysis *analysis,
                                      const char *out_dir,
                                      uint32_t formats);

// Unbinned estimate at a single `(x, h)`.
//
// # Safety
// `sample` must be a live handle and `out` valid for one write.
enum SizerStatus sizer_direct_estimate(const struct SizerSample *sample,
                                       enum SizerMode mode,
                                       enum SizerConvention convention,
                                       double x,
                                       double h,
                                       struct SizerDirectEstimate *out);

// Standard normal quantile for `p` in (0, 1).
//
// # Safety
// `out` must be valid for one write.
enum SizerStatus sizer_normal_quantile(double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIZER_H */
