#ifndef FOREST_FIRE_H
#define FOREST_FIRE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FfpStatus {
  FFP_STATUS_OK = 0,
  FFP_STATUS_NULL_POINTER = 1,
  FFP_STATUS_INVALID_PARAMETER = 2,
  FFP_STATUS_RESOURCE = 3,
  FFP_STATUS_RUNTIME = 4,
  FFP_STATUS_PANIC = 5,
} FfpStatus;

/**
 * Discrete process handle.
 */
typedef struct FfpDiscrete FfpDiscrete;

/**
 * Simulated limit process handle.
 */
typedef struct FfpLimit FfpLimit;

typedef struct FfpScales {
  double lambda;
  double pi;
  double a;
  uint64_t n;
  uint64_t m;
  double eps;
  double ratio;
  double zeta;
  bool outside_asymptotic_range;
} FfpScales;

/**
 * Observables at a point; `d_lo`/`d_hi` are meaningful only when
 * `has_cluster` is set.
 */
typedef struct FfpObservables {
  bool has_cluster;
  int64_t cluster_lo;
  int64_t cluster_hi;
  double d_lo;
  double d_hi;
  double k;
  double z;
  double w;
} FfpObservables;

typedef struct FfpQuery {
  double value;
  double h;
  bool d_empty;
  double d_lo;
  double d_hi;
} FfpQuery;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *ffp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ffp_version(void);

/**
 * # Safety
 * `out` must be null or point to writable memory for one `FfpScales`.
 */
enum FfpStatus ffp_scales(double lambda, double pi, struct FfpScales *out);

/**
 * New discrete process on `[-A, A]` with Poisson matches.
 *
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum FfpStatus ffp_discrete_new(double lambda,
                                double pi,
                                double big_a,
                                uint64_t seed,
                                struct FfpDiscrete **out);

/**
 * Run to macroscopic time `t`.
 *
 * # Safety
 * `h` must be null or a live handle from [`ffp_discrete_new`].
 */
enum FfpStatus ffp_discrete_advance(struct FfpDiscrete *h, double t);

/**
 * # Safety
 * `h` must be null or a live handle; `out` null or writable.
 */
enum FfpStatus ffp_discrete_now(const struct FfpDiscrete *h, double *out);

/**
 * # Safety
 * `h` must be null or a live handle; `out` null or writable.
 */
enum FfpStatus ffp_discrete_observe(const struct FfpDiscrete *h,
                                    double x,
                                    struct FfpObservables *out);

/**
 * # Safety
 * `h` must be null or a handle from [`ffp_discrete_new`] not yet freed.
 */
void ffp_discrete_free(struct FfpDiscrete *h);

/**
 * Limit process with front slope `p` (`p = 0`: instantaneous fires) driven
 * by the marks of `seed` on `[-A, A] × [0, T]`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum FfpStatus ffp_limit_simulate_p(double p,
                                    double big_a,
                                    double horizon,
                                    uint64_t seed,
                                    struct FfpLimit **out);

/**
 * Slow-regime limit process with exponent `z0`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum FfpStatus ffp_limit_simulate_inf(double z0,
                                      double big_a,
                                      double horizon,
                                      uint64_t seed,
                                      struct FfpLimit **out);

/**
 * # Safety
 * `h` must be null or a live handle; `out` null or writable.
 */
enum FfpStatus ffp_limit_event_count(const struct FfpLimit *h, size_t *out);

/**
 * # Safety
 * `h` must be null or a live handle; `out` null or writable.
 */
enum FfpStatus ffp_limit_query(const struct FfpLimit *h, double x, double t, struct FfpQuery *out);

/**
 * # Safety
 * `h` must be null or a handle from a `ffp_limit_simulate_*` call not yet
 * freed.
 */
void ffp_limit_free(struct FfpLimit *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOREST_FIRE_H */
