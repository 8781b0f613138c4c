#ifndef ELLIPTIC_CAUCHY_H
#define ELLIPTIC_CAUCHY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EcStatus {
  EC_STATUS_OK = 0,
  EC_STATUS_NULL_POINTER = 1,
  EC_STATUS_INVALID_ARGUMENT = 2,
  EC_STATUS_SINGULAR_DIFFERENCE = 3,
  EC_STATUS_LAMBDA_CHAIN_SINGULAR = 4,
  EC_STATUS_NEAR_LATTICE = 5,
  EC_STATUS_RANGE = 6,
  EC_STATUS_SERIES_NOT_CONVERGED = 7,
  EC_STATUS_BREAKDOWN = 8,
  EC_STATUS_INDEX_SET = 9,
  EC_STATUS_BUFFER_TOO_SMALL = 10,
  EC_STATUS_PANIC = 99,
} EcStatus;

typedef enum EcMethod {
  EC_METHOD_CLOSED_FORM = 0,
  EC_METHOD_PEELING = 1,
  EC_METHOD_LDU = 2,
} EcMethod;

typedef enum EcFactor {
  EC_FACTOR_UPPER = 0,
  EC_FACTOR_DIAGONAL = 1,
  EC_FACTOR_LOWER = 2,
} EcFactor;

/**
 * Factors of a decomposition with their reconstruction residual.
 */
typedef struct EcDecomposition EcDecomposition;

/**
 * A sigma kernel evaluated with default options.
 */
typedef struct EcKernel EcKernel;

/**
 * A parsed problem document.
 */
typedef struct EcProblem EcProblem;

typedef struct EcComplex {
  double re;
  double im;
} EcComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next call into this library on the thread.
 */
const char *ec_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ec_version(void);

/**
 * Parses a problem document (the same JSON the command-line tool reads).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EcStatus ec_problem_from_json(const char *json, struct EcProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from [`ec_problem_from_json`] not yet freed.
 */
void ec_problem_free(struct EcProblem *problem);

/**
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum EcStatus ec_problem_size(const struct EcProblem *problem, size_t *out);

/**
 * Writes the `n × n` Cauchy-like matrix row-major into `out`, which must
 * hold at least `n²` entries.
 *
 * # Safety
 * `problem` must be a live handle and `out` must point to `len` writable entries.
 */
enum EcStatus ec_build_matrix(const struct EcProblem *problem, struct EcComplex *out, size_t len);

/**
 * Decomposes the problem with `method`, an [`EcMethod`] value, and
 * measures the reconstruction residual against the matrix the method
 * targets.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum EcStatus ec_decompose(const struct EcProblem *problem,
                           uint32_t method,
                           struct EcDecomposition **out);

/**
 * # Safety
 * `decomposition` must be null or a handle from [`ec_decompose`] not yet freed.
 */
void ec_decomposition_free(struct EcDecomposition *decomposition);

/**
 * Writes one factor, an [`EcFactor`] value, as a dense row-major `n × n`
 * array, structural zeros included.
 *
 * # Safety
 * `decomposition` must be a live handle and `out` must point to `len` writable entries.
 */
enum EcStatus ec_decomposition_factor(const struct EcDecomposition *decomposition,
                                      uint32_t factor,
                                      struct EcComplex *out,
                                      size_t len);

/**
 * Relative Frobenius residual of the factor product.
 *
 * # Safety
 * `decomposition` must be a live handle and `out` writable.
 */
enum EcStatus ec_decomposition_residual(const struct EcDecomposition *decomposition, double *out);

/**
 * Closed-form determinant of the Cauchy-like matrix.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum EcStatus ec_determinant(const struct EcProblem *problem, struct EcComplex *out);

/**
 * Closed-form minor on 0-based `rows` and `cols`, each of length `k`.
 *
 * # Safety
 * `problem` must be a live handle, `rows` and `cols` must point to `k`
 * readable indices, and `out` must be writable.
 */
enum EcStatus ec_minor(const struct EcProblem *problem,
                       const size_t *rows,
                       const size_t *cols,
                       size_t k,
                       struct EcComplex *out);

/**
 * Parses a kernel object such as `{"variant":"elliptic","omega1":[0.5,0],"tau":[0,1]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum EcStatus ec_kernel_from_json(const char *json, struct EcKernel **out);

/**
 * # Safety
 * `kernel` must be null or a handle from [`ec_kernel_from_json`] not yet freed.
 */
void ec_kernel_free(struct EcKernel *kernel);

/**
 * # Safety
 * `kernel` must be a live handle and `out` writable.
 */
enum EcStatus ec_kernel_sigma(const struct EcKernel *kernel,
                              struct EcComplex z,
                              struct EcComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLIPTIC_CAUCHY_H */
