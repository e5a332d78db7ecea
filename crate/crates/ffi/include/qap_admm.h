#ifndef QAP_ADMM_H
#define QAP_ADMM_H

/* Generated by cbindgen from the qap-admm-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Basis construction selector.
 */
typedef enum QapBasis {
  QAP_BASIS_DENSE = 0,
  QAP_BASIS_SPARSE = 1,
} QapBasis;

/**
 * Y-step polyhedron selector.
 */
typedef enum QapPolytope {
  QAP_POLYTOPE_GANGSTER_MANIFOLD = 1,
  QAP_POLYTOPE_GANGSTER_BOX = 2,
} QapPolytope;

/**
 * Status codes returned by every entry point.
 */
typedef enum QapStatus {
  QAP_STATUS_OK = 0,
  QAP_STATUS_NULL_ARGUMENT = 1,
  QAP_STATUS_INVALID_UTF8 = 2,
  QAP_STATUS_PARSE_ERROR = 3,
  QAP_STATUS_DIMENSION_ERROR = 4,
  QAP_STATUS_CONFIG_ERROR = 5,
  QAP_STATUS_NUMERICAL_ERROR = 6,
  QAP_STATUS_DIVERGENCE = 7,
  QAP_STATUS_IO_ERROR = 8,
  QAP_STATUS_BUFFER_TOO_SMALL = 9,
  QAP_STATUS_INTERNAL_PANIC = 10,
} QapStatus;

/**
 * Opaque parsed instance.
 */
typedef struct QapInstanceHandle QapInstanceHandle;

/**
 * Opaque solve outcome.
 */
typedef struct QapResultHandle QapResultHandle;

/**
 * Plain-struct solver options; obtain defaults from
 * `qap_solve_options_default` and override fields as needed.
 */
typedef struct QapSolveOptions {
  /**
   * Stopping tolerance on the max ADMM residual.
   */
  double tol;
  uint64_t max_iters;
  /**
   * Penalty parameter; non-positive selects the default n/3.
   */
  double beta;
  /**
   * Dual step scale in (0, 1.618035].
   */
  double gamma;
  enum QapPolytope polytope;
  /**
   * 0 for the full-rank R-step, r > 0 for the rank-r restriction.
   */
  uint32_t rank;
  enum QapBasis basis;
  /**
   * Wall-clock limit in seconds; non-positive disables.
   */
  double time_limit_secs;
} QapSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default solver options (tol 1e-5, 50000 iterations, box polytope,
 * full-rank, dense basis).
 */
struct QapSolveOptions qap_solve_options_default(void);

/**
 * Static human-readable description of a status code.
 */
const char *qap_status_message(enum QapStatus status);

/**
 * Parses QAPLIB text (order, then A and B row-major) into an instance.
 *
 * # Safety
 * `text` and `name` must be valid NUL-terminated strings; `out` must be a
 * valid pointer. On success `*out` owns the instance and must be released
 * with `qap_instance_free`.
 */
enum QapStatus qap_instance_parse(const char *text,
                                  const char *name,
                                  struct QapInstanceHandle **out);

/**
 * Builds an instance from row-major n×n arrays; `c` may be null for zero
 * linear costs.
 *
 * # Safety
 * `a` and `b` (and `c` when non-null) must point to n·n doubles; `name`
 * must be a valid NUL-terminated string; `out` must be valid.
 */
enum QapStatus qap_instance_from_arrays(uint64_t n,
                                        const double *a,
                                        const double *b,
                                        const double *c,
                                        const char *name,
                                        struct QapInstanceHandle **out);

/**
 * Problem order of an instance, or 0 when the handle is null.
 *
 * # Safety
 * `inst` must be a handle from this library or null.
 */
uint64_t qap_instance_order(const struct QapInstanceHandle *inst);

/**
 * Releases an instance handle; null is a no-op.
 *
 * # Safety
 * `inst` must be a handle from this library (or null) and not used after.
 */
void qap_instance_free(struct QapInstanceHandle *inst);

/**
 * Runs the full solve/bound pipeline. `opts` may be null for defaults.
 *
 * # Safety
 * `inst` must be a live instance handle; `out` must be valid. On success
 * `*out` owns the result and must be released with `qap_result_free`.
 */
enum QapStatus qap_solve(const struct QapInstanceHandle *inst,
                         const struct QapSolveOptions *opts,
                         struct QapResultHandle **out);

/**
 * Certified real lower bound.
 *
 * # Safety
 * `res` must be a live result handle.
 */
double qap_result_lower_bound(const struct QapResultHandle *res);

/**
 * Integer-strengthened lower bound (equals the real bound for non-integer
 * data).
 *
 * # Safety
 * `res` must be a live result handle.
 */
double qap_result_lower_bound_int(const struct QapResultHandle *res);

/**
 * Upper bound from the rounded permutation.
 *
 * # Safety
 * `res` must be a live result handle.
 */
double qap_result_upper_bound(const struct QapResultHandle *res);

/**
 * Iterations performed.
 *
 * # Safety
 * `res` must be a live result handle.
 */
uint64_t qap_result_iterations(const struct QapResultHandle *res);

/**
 * Nonzero when the solver reached its tolerance.
 *
 * # Safety
 * `res` must be a live result handle.
 */
int32_t qap_result_converged(const struct QapResultHandle *res);

/**
 * Copies the rounded permutation (0-based images) into `buf`.
 *
 * # Safety
 * `res` must be a live result handle; `buf` must hold `len` entries.
 */
enum QapStatus qap_result_permutation(const struct QapResultHandle *res,
                                      uint64_t *buf,
                                      uint64_t len);

/**
 * Releases a result handle; null is a no-op.
 *
 * # Safety
 * `res` must be a handle from this library (or null) and not used after.
 */
void qap_result_free(struct QapResultHandle *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAP_ADMM_H */
