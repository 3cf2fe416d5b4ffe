#ifndef CSR_SPACINGS_H
#define CSR_SPACINGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Fewer points than the asymptotic approximation is meant for.
 */
#define CSR_WARN_SMALL_SAMPLE 1

/**
 * The kernel violates one of the regularity conditions.
 */
#define CSR_WARN_KERNEL_CONDITIONS 2

/**
 * Result code of every fallible call.
 */
typedef enum CsrStatus {
  CSR_STATUS_OK = 0,
  CSR_STATUS_PARSE_ERROR = 1,
  CSR_STATUS_OUTSIDE_WINDOW = 2,
  CSR_STATUS_EMPTY_PATTERN = 3,
  CSR_STATUS_INVALID_WINDOW = 4,
  CSR_STATUS_COORDINATE_DOMAIN = 5,
  CSR_STATUS_NON_UNIT_WINDOW = 6,
  CSR_STATUS_UNKNOWN_KERNEL = 7,
  CSR_STATUS_DEGENERATE_SPACING = 8,
  CSR_STATUS_NUMERICAL_DOMAIN = 9,
  CSR_STATUS_NUMERICAL_CONSISTENCY = 10,
  CSR_STATUS_DEGENERATE_STATISTIC = 11,
  CSR_STATUS_INVALID_ARGUMENT = 12,
  CSR_STATUS_INFEASIBLE = 13,
  CSR_STATUS_IO_ERROR = 14,
  CSR_STATUS_NULL_POINTER = 15,
  CSR_STATUS_PANIC = 16,
} CsrStatus;

typedef enum CsrMethod {
  CSR_METHOD_CLOSED_FORM = 0,
  CSR_METHOD_QUADRATURE = 1,
  CSR_METHOD_MONTE_CARLO = 2,
} CsrMethod;

typedef enum CsrSided {
  CSR_SIDED_TWO = 0,
  CSR_SIDED_UPPER = 1,
  CSR_SIDED_LOWER = 2,
} CsrSided;

typedef enum CsrSampler {
  CSR_SAMPLER_MORAN = 0,
  CSR_SAMPLER_UNIFORM = 1,
} CsrSampler;

/**
 * Opaque kernel handle.
 */
typedef struct CsrKernel CsrKernel;

/**
 * Opaque point pattern handle.
 */
typedef struct CsrPattern CsrPattern;

/**
 * Limiting moments of a kernel; `sigma2 = 2(eta − c²)`.
 */
typedef struct CsrMomentSet {
  double mu;
  double eta;
  double c;
  double sigma2;
  enum CsrMethod method;
  double err;
  bool degenerate;
} CsrMomentSet;

typedef struct CsrTestResult {
  double statistic;
  /**
   * Spacings per axis, one more than the point count.
   */
  size_t n;
  double z;
  double p_asymptotic;
  struct CsrMomentSet moments;
  /**
   * Bitwise OR of `CSR_WARN_*` flags.
   */
  uint32_t warnings;
} CsrTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a
 * successful one. Valid until the next call into this library on the same
 * thread.
 */
const char *csr_last_error_message(void);

/**
 * Static snake_case name of a status code.
 */
const char *csr_status_name(enum CsrStatus status);

/**
 * Looks up a built-in kernel by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum CsrStatus csr_kernel_new(const char *name, struct CsrKernel **out);

/**
 * # Safety
 * `kernel` must come from [`csr_kernel_new`] and not be freed already.
 * Null is ignored.
 */
void csr_kernel_free(struct CsrKernel *kernel);

/**
 * # Safety
 * `kernel` must be a live handle and `out` writable.
 */
enum CsrStatus csr_kernel_evaluate(const struct CsrKernel *kernel, double t, double *out);

/**
 * Closed-form moments when known, otherwise quadrature with `nodes`
 * points per axis.
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable.
 */
enum CsrStatus csr_moments_compute(const struct CsrKernel *kernel,
                                   size_t nodes,
                                   struct CsrMomentSet *out);

/**
 * Monte Carlo moment estimate from `samples` exponential triples.
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable.
 */
enum CsrStatus csr_moments_mc_oracle(const struct CsrKernel *kernel,
                                     uint64_t samples,
                                     uint64_t seed,
                                     struct CsrMomentSet *out);

/**
 * Builds a pattern from `len` coordinate pairs inside the window
 * `[x0, x1] × [y0, y1]`.
 *
 * # Safety
 * `xs` and `ys` must each hold `len` readable doubles and `out` be
 * writable.
 */
enum CsrStatus csr_pattern_new(const double *xs,
                               const double *ys,
                               size_t len,
                               double x0,
                               double x1,
                               double y0,
                               double y1,
                               struct CsrPattern **out);

/**
 * Reads a two-column CSV file of coordinates.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum CsrStatus csr_pattern_load_csv(const char *path,
                                    double x0,
                                    double x1,
                                    double y0,
                                    double y1,
                                    struct CsrPattern **out);

/**
 * # Safety
 * `pattern` must come from a pattern constructor and not be freed
 * already. Null is ignored.
 */
void csr_pattern_free(struct CsrPattern *pattern);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `pattern` must be null or a live handle.
 */
size_t csr_pattern_len(const struct CsrPattern *pattern);

/**
 * Statistic `Σ g(n² A_ij)` of the pattern rescaled to the unit square.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CsrStatus csr_v2_statistic(const struct CsrPattern *pattern,
                                const struct CsrKernel *kernel,
                                double *out);

/**
 * Asymptotic normal test of the pattern.
 *
 * # Safety
 * Handles and `moments` must be valid and `out` writable.
 */
enum CsrStatus csr_asymptotic_test(const struct CsrPattern *pattern,
                                   const struct CsrKernel *kernel,
                                   const struct CsrMomentSet *moments,
                                   enum CsrSided sided,
                                   struct CsrTestResult *out);

/**
 * Add-one Monte Carlo p-value from `replicates` null statistics.
 *
 * # Safety
 * Handles and `moments` must be valid and `out` writable.
 */
enum CsrStatus csr_mc_pvalue(const struct CsrPattern *pattern,
                             const struct CsrKernel *kernel,
                             const struct CsrMomentSet *moments,
                             size_t replicates,
                             uint64_t seed,
                             enum CsrSampler sampler,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSR_SPACINGS_H */
