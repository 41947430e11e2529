#ifndef NSFOM_H
#define NSFOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum NsfomStatus {
  NSFOM_STATUS_OK = 0,
  NSFOM_STATUS_NULL_POINTER = 1,
  NSFOM_STATUS_INVALID_ARGUMENT = 2,
  NSFOM_STATUS_DIMENSION_MISMATCH = 3,
  NSFOM_STATUS_DEGENERATE_DIRECTION = 4,
  NSFOM_STATUS_PARSE_ERROR = 5,
  NSFOM_STATUS_IO_ERROR = 6,
  NSFOM_STATUS_NUMERICAL_FAILURE = 7,
  NSFOM_STATUS_BUFFER_TOO_SMALL = 8,
  NSFOM_STATUS_PANIC = 9,
} NsfomStatus;

typedef enum NsfomMethod {
  NSFOM_METHOD_PM = 0,
  NSFOM_METHOD_MEM = 1,
  NSFOM_METHOD_RM = 2,
} NsfomMethod;

typedef enum NsfomSampleMode {
  NSFOM_SAMPLE_MODE_SHARED = 0,
  NSFOM_SAMPLE_MODE_INDEPENDENT = 1,
} NsfomSampleMode;

/**
 * Opaque problem handle.
 */
typedef struct NsfomProblem NsfomProblem;

/**
 * Opaque run trace.
 */
typedef struct NsfomTrace NsfomTrace;

/**
 * Schedule parameters. `alpha_known == 0` selects the tail-agnostic schedule
 * and ignores `alpha`. `eta_scale <= 0` selects the library default for the
 * step rule.
 */
typedef struct NsfomScheduleParams {
  enum NsfomMethod method;
  bool alpha_known;
  double alpha;
  uint32_t p;
  double eta_scale;
} NsfomScheduleParams;

typedef struct NsfomRunParams {
  struct NsfomScheduleParams schedule;
  bool normalized;
  enum NsfomSampleMode sample_mode;
  size_t iterations;
  /**
   * Oracle-call budget; 0 means unlimited.
   */
  size_t max_oracle_calls;
  /**
   * Record every this many steps, plus the first and last.
   */
  size_t telemetry_every;
  uint64_t seed;
  uint64_t stream;
} NsfomRunParams;

/**
 * One telemetry row of a run.
 */
typedef struct NsfomRecord {
  size_t k;
  double f_val;
  double grad_norm;
  double mom_norm;
  size_t oracle_calls;
} NsfomRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Error message of the last fallible call on this thread, empty if it
 * succeeded.
 * The pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *nsfom_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nsfom_version(void);

/**
 * Step size and momentum weight at iteration `k`.
 *
 * # Safety
 * `params`, `eta_out` and `theta_out` must be valid pointers.
 */
enum NsfomStatus nsfom_schedule_at(const struct NsfomScheduleParams *params,
                                   bool normalized,
                                   size_t k,
                                   double *eta_out,
                                   double *theta_out);

/**
 * Extrapolation offsets and weights for `q` points given the base offset
 * `gamma_k`. Both output buffers must hold at least `q` values.
 *
 * # Safety
 * `gammas_out` and `thetas_out` must point to `capacity` writable doubles.
 */
enum NsfomStatus nsfom_extrapolation_weights(double gamma_k,
                                             size_t q,
                                             double *gammas_out,
                                             double *thetas_out,
                                             size_t capacity);

/**
 * Inverse-CDF map from a uniform draw in (0, 1) to the symmetric heavy-tailed
 * noise variable. Returns NaN outside (0, 1).
 */
double nsfom_heavy_tail_from_uniform(double u);

/**
 * Fill `out` with `len` heavy-tailed draws from stream (`seed`, `stream`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum NsfomStatus nsfom_sample_heavy_tail(uint64_t seed, uint64_t stream, double *out, size_t len);

/**
 * Separable quadratic `½ Σ c_i x_i²`. With `noisy` set, gradients carry the
 * additive heavy-tailed noise.
 *
 * # Safety
 * `curvature` must point to `n` doubles; `out` must be a valid pointer.
 */
enum NsfomStatus nsfom_problem_quadratic(const double *curvature,
                                         size_t n,
                                         bool noisy,
                                         struct NsfomProblem **out);

/**
 * Synthetic data-fitting problem of dimension `n` with `m` samples, with
 * additive heavy-tailed gradient noise. If `x_star_out` is non-null it
 * receives the `n` generating parameters.
 *
 * # Safety
 * `out` must be valid; `x_star_out`, if non-null, must hold `n` doubles.
 */
enum NsfomStatus nsfom_problem_synthetic(size_t n,
                                         size_t m,
                                         uint64_t seed,
                                         double *x_star_out,
                                         struct NsfomProblem **out);

/**
 * Robust regression on a numeric CSV file. `target_column` is a 0-based
 * column index, or negative for the last column.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
enum NsfomStatus nsfom_problem_csv(const char *path,
                                   int64_t target_column,
                                   size_t batch_size,
                                   struct NsfomProblem **out);

/**
 * # Safety
 * `problem` must come from a `nsfom_problem_*` constructor and not be used
 * afterwards. Null is accepted.
 */
void nsfom_problem_free(struct NsfomProblem *problem);

/**
 * Problem dimension, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t nsfom_problem_dim(const struct NsfomProblem *problem);

/**
 * # Safety
 * `problem` must be a live handle, `x` must point to `n` doubles and `out`
 * must be valid.
 */
enum NsfomStatus nsfom_problem_objective(const struct NsfomProblem *problem,
                                         const double *x,
                                         size_t n,
                                         double *out);

/**
 * Exact gradient at `x`.
 *
 * # Safety
 * `problem` must be a live handle; `x` and `grad_out` must each point to `n`
 * doubles.
 */
enum NsfomStatus nsfom_problem_gradient(const struct NsfomProblem *problem,
                                        const double *x,
                                        size_t n,
                                        double *grad_out);

/**
 * Run one optimizer from `x0` and return its telemetry trace.
 *
 * # Safety
 * `problem` and `params` must be valid, `x0` must point to `n` doubles and
 * `trace_out` must be a valid pointer.
 */
enum NsfomStatus nsfom_run(const struct NsfomProblem *problem,
                           const struct NsfomRunParams *params,
                           const double *x0,
                           size_t n,
                           struct NsfomTrace **trace_out);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t nsfom_trace_len(const struct NsfomTrace *trace);

/**
 * # Safety
 * `trace` must be a live handle and `out` a valid pointer.
 */
enum NsfomStatus nsfom_trace_get(const struct NsfomTrace *trace,
                                 size_t index,
                                 struct NsfomRecord *out);

/**
 * # Safety
 * `trace` must come from [`nsfom_run`] and not be used afterwards. Null is
 * accepted.
 */
void nsfom_trace_free(struct NsfomTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSFOM_H */
