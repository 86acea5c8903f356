#ifndef COUNTFACT_H
#define COUNTFACT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_ARGUMENT = 2,
  CF_STATUS_BUFFER_TOO_SMALL = 3,
  CF_STATUS_DENSE_BUDGET_EXCEEDED = 4,
  CF_STATUS_INTERNAL = 5,
} CfStatus;

// Values accepted by the `method` parameters.
typedef enum CfMethod {
  CF_METHOD_SQRT = 0,
  CF_METHOD_NSR = 1,
  CF_METHOD_GROUP_ALGEBRA = 2,
} CfMethod;

// Values accepted by the `metric` parameters.
typedef enum CfMetric {
  CF_METRIC_MAX_SE = 0,
  CF_METRIC_MEAN_SE = 1,
} CfMetric;

// Opaque factorization handle.
typedef struct CfFactorization CfFactorization;

typedef struct CfSimulation {
  double sigma;
  double empirical_err_inf;
  double empirical_err_2;
  double theory_err_inf;
  double theory_err_2;
} CfSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code.
const char *cf_status_message(uint32_t status);

// Detail for the last failed call on this thread; empty after a success.
// Valid until the next `cf_` call on the same thread.
const char *cf_last_error_message(void);

// Builds a factorization of the `n x n` counting matrix.
//
// # Safety
// `out` must be valid for one pointer write.
enum CfStatus cf_factorization_new(uint32_t method, size_t n, struct CfFactorization **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `h` must be null or a handle from `cf_factorization_new` not yet freed.
void cf_factorization_free(struct CfFactorization *h);

// # Safety
// `h` must be a live handle; `out` valid for one write.
enum CfStatus cf_factorization_n(const struct CfFactorization *h, size_t *out);

// Inner dimension `m`: `n` for sqrt and NSR, `2n` for group algebra.
//
// # Safety
// `h` must be a live handle; `out` valid for one write.
enum CfStatus cf_factorization_inner_dim(const struct CfFactorization *h, size_t *out);

// # Safety
// `h` must be a live handle; `out` valid for one write.
enum CfStatus cf_factorization_maxse(const struct CfFactorization *h, double *out);

// # Safety
// `h` must be a live handle; `out` valid for one write.
enum CfStatus cf_factorization_meanse(const struct CfFactorization *h, double *out);

// Max-abs entrywise deviation of `L R` from the counting matrix.
//
// # Safety
// `h` must be a live handle; `out` valid for one write.
enum CfStatus cf_factorization_verify(const struct CfFactorization *h, double *out);

// Squared row norms of `L` (`n` values).
//
// # Safety
// `h` must be a live handle; `out` valid for `len` writes.
enum CfStatus cf_factorization_row_norms_sq_left(const struct CfFactorization *h,
                                                 double *out,
                                                 size_t len);

// Squared column norms of `R` (`n` values).
//
// # Safety
// `h` must be a live handle; `out` valid for `len` writes.
enum CfStatus cf_factorization_col_norms_sq_right(const struct CfFactorization *h,
                                                  double *out,
                                                  size_t len);

// `L` as an `n x m` row-major array.
//
// # Safety
// `h` must be a live handle; `out` valid for `len` writes.
enum CfStatus cf_factorization_dense_left(const struct CfFactorization *h, double *out, size_t len);

// `R` as an `m x n` row-major array.
//
// # Safety
// `h` must be a live handle; `out` valid for `len` writes.
enum CfStatus cf_factorization_dense_right(const struct CfFactorization *h,
                                           double *out,
                                           size_t len);

// First `n` Wallis coefficients into `out`.
//
// # Safety
// `out` valid for `len` writes.
enum CfStatus cf_wallis_coeffs(size_t n, double *out, size_t len);

// # Safety
// `out` valid for one write.
enum CfStatus cf_landau_alpha(size_t n, double *out);

// # Safety
// `out` valid for one write.
enum CfStatus cf_nuclear_lower_bound(size_t n, double *out);

// # Safety
// `out` valid for one write.
enum CfStatus cf_mathias_lower_bound(size_t n, double *out);

// Limiting value of `metric - log(n)/pi` for `method`.
//
// # Safety
// `out` valid for one write.
enum CfStatus cf_predicted_residual(uint32_t method, uint32_t metric, double *out);

// Monte Carlo run of the Gaussian matrix mechanism on input `x` (length `n`).
//
// # Safety
// `h` must be a live handle; `x` valid for `x_len` reads; `out` valid for one
// write.
enum CfStatus cf_simulate(const struct CfFactorization *h,
                          double mu,
                          uint64_t trials,
                          uint64_t seed,
                          const double *x,
                          size_t x_len,
                          struct CfSimulation *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUNTFACT_H */
