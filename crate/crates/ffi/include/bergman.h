#ifndef BERGMAN_H
#define BERGMAN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Truncated operator selector.
 */
typedef enum BgOperator {
  BG_OPERATOR_TOEPLITZ = 0,
  BG_OPERATOR_HANKEL = 1,
} BgOperator;

/**
 * Result codes.
 */
typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_NULL_POINTER = 1,
  /**
   * Malformed text, out-of-range numbers or non-UTF-8 input.
   */
  BG_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A size or work cap was exceeded.
   */
  BG_STATUS_RESOURCE = 3,
  BG_STATUS_IO = 4,
  /**
   * The call completed but missed its tolerance; outputs are filled.
   */
  BG_STATUS_NOT_CONVERGED = 5,
  BG_STATUS_PANIC = 6,
} BgStatus;

/**
 * Opaque symbol handle.
 */
typedef struct BgSymbol BgSymbol;

/**
 * Opaque analytic test function handle.
 */
typedef struct BgTestFunction BgTestFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated,
 * truncated to `len`) into `buf` and returns the full message length in
 * bytes, excluding the terminator. `buf` may be null to query the length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t bg_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bg_version(void);

/**
 * Parses a symbol such as `ab:0.25` or `abs(pow:0.5)`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum BgStatus bg_symbol_parse(const char *text, struct BgSymbol **out);

/**
 * Releases a symbol. Null is ignored.
 *
 * # Safety
 * `sym` must come from [`bg_symbol_parse`] and not be used afterwards.
 */
void bg_symbol_free(struct BgSymbol *sym);

/**
 * Evaluates the symbol at `rho·e^{iφ}`.
 *
 * # Safety
 * Pointers must be valid; `re`/`im` must be writable.
 */
enum BgStatus bg_symbol_eval(const struct BgSymbol *sym,
                             double rho,
                             double phi,
                             double *re,
                             double *im);

/**
 * Parses a test function such as `poly:1,1` or `mono:3`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum BgStatus bg_test_function_parse(const char *text, struct BgTestFunction **out);

/**
 * Releases a test function. Null is ignored.
 *
 * # Safety
 * `f` must come from [`bg_test_function_parse`] and not be used afterwards.
 */
void bg_test_function_free(struct BgTestFunction *f);

/**
 * Diagonal eigenvalue `γ_n` of the Toeplitz operator with a radial symbol.
 *
 * # Safety
 * Pointers must be valid; outputs must be writable.
 */
enum BgStatus bg_radial_eigenvalue(const struct BgSymbol *sym,
                                   size_t n,
                                   double tol,
                                   double *re,
                                   double *im,
                                   double *err);

/**
 * Carleson mean `|D|^{-1}∫_D a dA` over the box with inner radius `r` and
 * starting angle `theta`.
 *
 * # Safety
 * Pointers must be valid; outputs must be writable.
 */
enum BgStatus bg_carleson_mean(const struct BgSymbol *sym,
                               double r,
                               double theta,
                               double tol,
                               double *re,
                               double *im,
                               double *err);

/**
 * Applies the operator truncated at radius `rho` to `f` at `len` points
 * `z_re[i] + i·z_im[i]` of the open disc.
 *
 * # Safety
 * Input arrays must hold `len` values and output arrays must be writable
 * for `len` values.
 */
enum BgStatus bg_truncated_apply(enum BgOperator op,
                                 const struct BgSymbol *sym,
                                 double rho,
                                 const struct BgTestFunction *f,
                                 const double *z_re,
                                 const double *z_im,
                                 size_t len,
                                 double tol,
                                 double *out_re,
                                 double *out_im,
                                 double *out_err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERGMAN_H */
