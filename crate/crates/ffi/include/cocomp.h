#ifndef COCOMP_H
#define COCOMP_H

/* Generated by build.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
enum CocompStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  COCOMP_STATUS_OK = 0,
  COCOMP_STATUS_NULL_POINTER = 1,
  COCOMP_STATUS_INVALID_INPUT = 2,
  COCOMP_STATUS_DIMENSION_MISMATCH = 3,
  COCOMP_STATUS_NOT_IN_DELTA = 4,
  COCOMP_STATUS_NUMERICAL_FAILURE = 5,
  COCOMP_STATUS_PANIC = 6,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum CocompStatus CocompStatus;
#else
typedef int32_t CocompStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque common-complement certificate handle.
 */
typedef struct CocompCertificate CocompCertificate;

/**
 * Opaque subspace handle.
 */
typedef struct CocompSubspace CocompSubspace;

/**
 * `1` true, `0` false, `-1` indeterminate.
 */
typedef int32_t CocompTri;

/**
 * Verdicts of the three complementarity tests for a pair.
 */
typedef struct CocompCheck {
  CocompTri diff_invertible;
  CocompTri norm_lt_one;
  CocompTri direct_sum;
  /**
   * `‖P_S + P_T − 1‖`.
   */
  double norm_value;
  /**
   * `1 − norm_value`.
   */
  double margin;
} CocompCheck;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds `span` of the `cols` columns of the `n x cols` row-major matrix
 * `re + i im`. `im` may be null for a real matrix. The result may have
 * smaller dimension than `cols` when the columns are dependent.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `n * cols` doubles and `out`
 * to writable storage for one handle.
 */
CocompStatus cocomp_subspace_span(size_t n,
                                  size_t cols,
                                  const double *re,
                                  const double *im,
                                  struct CocompSubspace **out);

/**
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void cocomp_subspace_free(struct CocompSubspace *s);

/**
 * Ambient dimension, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t cocomp_subspace_ambient_dim(const struct CocompSubspace *s);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t cocomp_subspace_dim(const struct CocompSubspace *s);

/**
 * Copies the orthonormal basis (`ambient_dim x dim`, row-major) into `re`
 * and `im`, each of capacity `len`.
 *
 * # Safety
 * `s` must be a live handle; `re` and `im` must point to `len` doubles.
 */
CocompStatus cocomp_subspace_basis(const struct CocompSubspace *s,
                                   double *re,
                                   double *im,
                                   size_t len);

/**
 * Runs the three complementarity tests on `(s, t)`.
 *
 * # Safety
 * `s`, `t` must be live handles and `out` writable.
 */
CocompStatus cocomp_check(const struct CocompSubspace *s,
                          const struct CocompSubspace *t,
                          struct CocompCheck *out);

/**
 * Finds a common complement of two subspaces of equal dimension.
 *
 * # Safety
 * `s`, `t` must be live handles and `out` writable.
 */
CocompStatus cocomp_common_complement(const struct CocompSubspace *s,
                                      const struct CocompSubspace *t,
                                      uint64_t seed,
                                      struct CocompCertificate **out);

/**
 * New subspace handle holding the certified complement.
 *
 * # Safety
 * `cert` must be a live handle and `out` writable.
 */
CocompStatus cocomp_certificate_complement(const struct CocompCertificate *cert,
                                           struct CocompSubspace **out);

/**
 * Writes the margins against `S` and `T`.
 *
 * # Safety
 * `cert` must be a live handle; the outputs must be writable.
 */
CocompStatus cocomp_certificate_margins(const struct CocompCertificate *cert,
                                        double *margin_s,
                                        double *margin_t);

/**
 * # Safety
 * `cert` must be null or a handle from this library not yet freed.
 */
void cocomp_certificate_free(struct CocompCertificate *cert);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *cocomp_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COCOMP_H */
