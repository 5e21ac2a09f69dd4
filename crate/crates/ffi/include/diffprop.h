#ifndef DIFFPROP_H
#define DIFFPROP_H

/* Generated by cbindgen from the diffprop-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DiffpropStatus {
  DIFFPROP_STATUS_OK = 0,
  DIFFPROP_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside its domain.
   */
  DIFFPROP_STATUS_DOMAIN = 2,
  /**
   * Quadrature or root-finding did not converge.
   */
  DIFFPROP_STATUS_NUMERICAL = 3,
  /**
   * Unknown or unsupported method tag.
   */
  DIFFPROP_STATUS_METHOD = 4,
  /**
   * Counts for which the requested method is undefined.
   */
  DIFFPROP_STATUS_DEGENERATE = 5,
  /**
   * Output buffer has the wrong length.
   */
  DIFFPROP_STATUS_BUFFER_SIZE = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  DIFFPROP_STATUS_PANIC = 7,
} DiffpropStatus;

typedef enum DiffpropDiagnostic {
  DIFFPROP_DIAGNOSTIC_NONE = 0,
  DIFFPROP_DIAGNOSTIC_RADICAND_CLIPPED = 1,
  DIFFPROP_DIAGNOSTIC_CUBIC_LIMIT = 2,
} DiffpropDiagnostic;

/**
 * Opaque coverage curve.
 */
typedef struct DiffpropCurve DiffpropCurve;

/**
 * Opaque sample-size pair with its cached support.
 */
typedef struct DiffpropDesign DiffpropDesign;

typedef struct DiffpropInterval {
  double lower;
  double upper;
  double gamma;
  bool truncated;
  enum DiffpropDiagnostic diagnostic;
} DiffpropInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *diffprop_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *diffprop_version(void);

/**
 * Creates a design; release it with [`diffprop_design_free`].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum DiffpropStatus diffprop_design_new(uint32_t n1, uint32_t n2, struct DiffpropDesign **out);

/**
 * # Safety
 * `design` must be null or a handle from [`diffprop_design_new`] that has
 * not been freed.
 */
void diffprop_design_free(struct DiffpropDesign *design);

/**
 * Number of attainable observed differences; 0 for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
size_t diffprop_design_support_len(const struct DiffpropDesign *design);

/**
 * Writes the attainable differences in increasing order.
 *
 * # Safety
 * `design` must be a live handle and `values` must point to `len` doubles.
 */
enum DiffpropStatus diffprop_design_support(const struct DiffpropDesign *design,
                                            double *values,
                                            size_t len);

/**
 * Probability of every support point at true difference `theta_diff`,
 * in support order.
 *
 * # Safety
 * `design` must be a live handle and `pmf` must point to `len` doubles.
 */
enum DiffpropStatus diffprop_pmf(const struct DiffpropDesign *design,
                                 double theta_diff,
                                 double *pmf,
                                 size_t len);

/**
 * Exact interval for observed difference `u` with default tolerances.
 *
 * # Safety
 * `design` must be a live handle and `out` writable.
 */
enum DiffpropStatus diffprop_exact_interval(const struct DiffpropDesign *design,
                                            double u,
                                            double gamma,
                                            struct DiffpropInterval *out);

/**
 * Classical interval for counts `(x1, x2)`; `method` is a tag such as
 * `"k1"` or `"k5cc"`.
 *
 * # Safety
 * `design` must be a live handle, `method` a NUL-terminated string and
 * `out` writable.
 */
enum DiffpropStatus diffprop_classical_interval(const struct DiffpropDesign *design,
                                                uint32_t x1,
                                                uint32_t x2,
                                                double gamma,
                                                const char *method,
                                                bool truncated,
                                                struct DiffpropInterval *out);

/**
 * Coverage over the grid `-1, -1 + step, …, 1`; release the result with
 * [`diffprop_curve_free`].
 *
 * # Safety
 * `design` must be a live handle, `method` a NUL-terminated string and
 * `out` writable.
 */
enum DiffpropStatus diffprop_coverage_curve(const struct DiffpropDesign *design,
                                            const char *method,
                                            double gamma,
                                            double step,
                                            bool truncated,
                                            struct DiffpropCurve **out);

/**
 * Number of grid points; 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t diffprop_curve_len(const struct DiffpropCurve *curve);

/**
 * # Safety
 * `curve` must be a live handle; `theta_diff` and `coverage` writable.
 */
enum DiffpropStatus diffprop_curve_point(const struct DiffpropCurve *curve,
                                         size_t index,
                                         double *theta_diff,
                                         double *coverage);

/**
 * # Safety
 * `curve` must be null or a handle that has not been freed.
 */
void diffprop_curve_free(struct DiffpropCurve *curve);

/**
 * Variance of the observed difference for `n_total` trials with fraction
 * `f` in the first group.
 *
 * # Safety
 * `out` must be writable.
 */
enum DiffpropStatus diffprop_mixture_variance(uint32_t n_total,
                                              double f,
                                              double theta_diff,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIFFPROP_H */
