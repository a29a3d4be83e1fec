#ifndef STABLESUP_H
#define STABLESUP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI call.
 */
typedef enum SsupStatus {
  SsupStatus_Ok = 0,
  /**
   * Null pointer or otherwise invalid argument.
   */
  SsupStatus_InvalidArgument = 1,
  /**
   * Parameters outside the admissible (alpha, rho) region.
   */
  SsupStatus_Admissibility = 2,
  /**
   * alpha classified as numerically rational.
   */
  SsupStatus_RationalAlpha = 3,
  /**
   * rho falls in a Doney class of alpha.
   */
  SsupStatus_DoneyClass = 4,
  /**
   * Evaluation point outside the supported range.
   */
  SsupStatus_OutOfRange = 5,
  /**
   * The summation stopped before reaching the requested tolerance;
   * the output value is the best available estimate.
   */
  SsupStatus_NotConverged = 6,
  /**
   * Any other library error; see `ssup_last_error_message`.
   */
  SsupStatus_Internal = 7,
  /**
   * A panic crossed the FFI boundary (a bug; please report).
   */
  SsupStatus_Panic = 8,
} SsupStatus;

/**
 * Opaque parameter handle.
 */
typedef struct SsupParams SsupParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a parameter handle.
 *
 * `alpha_decimal` is a NUL-terminated decimal string (e.g. "1.4142135623");
 * keeping it textual lets the rationality gate see the exact input. Set
 * `assume_irrational` nonzero to treat the decimal as a truncation of an
 * irrational target. On success `*out` owns the handle; free it with
 * `ssup_params_free`.
 */
enum SsupStatus ssup_params_new(const char *alpha_decimal,
                                double rho,
                                int assume_irrational,
                                struct SsupParams **out);

/**
 * Release a handle created by `ssup_params_new`. Null is a no-op.
 */
void ssup_params_free(struct SsupParams *params);

/**
 * Supremum density p(x) by triangular summation along the continued-fraction
 * cutoffs of 2/alpha. On `SSUP_STATUS_NOT_CONVERGED` the best available
 * estimate is still stored in `*out`.
 */
enum SsupStatus ssup_density(const struct SsupParams *params, double x, double tol, double *out);

/**
 * Leading asymptotic coefficient of p(x) as x -> 0 (`side` = 0) or
 * x -> infinity (`side` = 1): the constant c in p(x) ~ c x^(alpha rho - 1)
 * respectively p(x) ~ c x^(-1 - alpha).
 *
 * Only the side covered by the convergent expansion of the branch is
 * available: side 0 for alpha > 1, side 1 for alpha < 1. The other side
 * returns `SSUP_STATUS_INVALID_ARGUMENT`.
 */
enum SsupStatus ssup_leading_asymptotic(const struct SsupParams *params, int side, double *out);

/**
 * Total mass of the computed density (a self-check; should be 1).
 */
enum SsupStatus ssup_total_mass(const struct SsupParams *params, double tol, double *out);

/**
 * Copy the last error message on this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes, excluding
 * the NUL.
 */
uintptr_t ssup_last_error_message(char *buf, uintptr_t len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* STABLESUP_H */
