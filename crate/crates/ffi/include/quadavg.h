#ifndef QUADAVG_H
#define QUADAVG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum QaStatus {
  QA_STATUS_OK = 0,
  QA_STATUS_NULL_POINTER = 1,
  QA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A data file could not be read.
   */
  QA_STATUS_NO_INPUT = 3,
  /**
   * The solver stopped on an error; a partial trace may still be returned.
   */
  QA_STATUS_SOLVER_FAILED = 4,
  /**
   * Writing an output file failed.
   */
  QA_STATUS_IO = 5,
  QA_STATUS_PANIC = 6,
} QaStatus;

typedef enum QaStopReason {
  /**
   * The run has not stopped normally (solver error).
   */
  QA_STOP_REASON_NONE = 0,
  QA_STOP_REASON_GRADIENT_ZERO = 1,
  QA_STOP_REASON_GAP_TOLERANCE = 2,
  QA_STOP_REASON_MAX_ITERATIONS = 3,
} QaStopReason;

/**
 * Opaque problem handle.
 */
typedef struct QaProblem QaProblem;

/**
 * Opaque handle to a finished (or failed) run.
 */
typedef struct QaTrace QaTrace;

/**
 * Solver settings; start from `qa_config_default`.
 */
typedef struct QaConfig {
  uint64_t max_iterations;
  double gap_tolerance;
  double line_search_tol;
  uint64_t memory;
  /**
   * Record wall-clock seconds in each record.
   */
  bool timing;
} QaConfig;

/**
 * One iteration of a trace.
 */
typedef struct QaRecord {
  uint64_t k;
  double f_plus;
  /**
   * Lower bound (or estimate-sequence value for the accelerated solvers).
   */
  double v;
  double gap;
  double g_classical;
  double grad_norm;
  double elapsed_s;
} QaRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *qa_last_error(void);

const char *qa_version(void);

struct QaConfig qa_config_default(void);

/**
 * Builds a problem from a spec such as `worst:b=100,n=50`,
 * `quadratic:n=20,alpha=1,beta=100` or `logistic:path=FILE,alpha=1e-4`.
 * `l1 > 0` adds `l1 * ||x||_1` (usable with `prox-geo-sub` only).
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QaStatus qa_problem_new(const char *spec, uint64_t seed, double l1, struct QaProblem **out);

/**
 * # Safety
 * `p` must come from `qa_problem_new` and not be used afterwards.
 */
void qa_problem_free(struct QaProblem *p);

/**
 * Dimension of the problem, 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t qa_problem_dimension(const struct QaProblem *p);

/**
 * Strong convexity and smoothness constants of the smooth part.
 *
 * # Safety
 * `p` must be a live handle; `alpha` and `beta` valid pointers.
 */
enum QaStatus qa_problem_constants(const struct QaProblem *p, double *alpha, double *beta);

/**
 * Value of the smooth part at `x`; the gradient is written to `grad` when
 * it is not null. Both arrays have length `n`.
 *
 * # Safety
 * `x` must point to `n` doubles, `grad` to `n` writable doubles or be null.
 */
enum QaStatus qa_problem_eval(const struct QaProblem *p,
                              const double *x,
                              size_t n,
                              double *value,
                              double *grad);

/**
 * Runs `solver` (`oqa`, `oqa-mem`, `geo`, `geo-sub`, `nesterov`,
 * `nesterov-ls`, `gd`, `prox-geo-sub`) from `x0`, or from the origin when
 * `x0` is null. A null `cfg` means the defaults.
 *
 * On `QA_STATUS_SOLVER_FAILED` `*out` still receives the records produced
 * before the error and must be freed.
 *
 * # Safety
 * Pointers must be valid; `x0` must point to `n` doubles when not null.
 */
enum QaStatus qa_solve(const struct QaProblem *p,
                       const char *solver,
                       const struct QaConfig *cfg,
                       const double *x0,
                       size_t n,
                       struct QaTrace **out);

/**
 * # Safety
 * `t` must come from `qa_solve` and not be used afterwards.
 */
void qa_trace_free(struct QaTrace *t);

/**
 * Number of records (iterations plus one), 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t qa_trace_len(const struct QaTrace *t);

/**
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum QaStatus qa_trace_record(const struct QaTrace *t, size_t index, struct QaRecord *out);

/**
 * # Safety
 * `t` must be null or a live handle.
 */
enum QaStopReason qa_trace_stop_reason(const struct QaTrace *t);

/**
 * Copies the best point found into `out` (length `n`, the problem
 * dimension). Unavailable after a solver failure.
 *
 * # Safety
 * `out` must point to `n` writable doubles.
 */
enum QaStatus qa_trace_final_iterate(const struct QaTrace *t, double *out, size_t n);

/**
 * Writes the trace as CSV.
 *
 * # Safety
 * `t` must be a live handle and `path` a NUL-terminated string.
 */
enum QaStatus qa_trace_write_csv(const struct QaTrace *t, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUADAVG_H */
