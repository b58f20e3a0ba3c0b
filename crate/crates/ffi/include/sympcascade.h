#ifndef SYMPCASCADE_H
#define SYMPCASCADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqStatus {
  SQ_STATUS_OK = 0,
  SQ_STATUS_NULL_POINTER = 1,
  SQ_STATUS_INVALID_ARGUMENT = 2,
  SQ_STATUS_DIMENSION_MISMATCH = 3,
  SQ_STATUS_NON_FINITE = 4,
  SQ_STATUS_RANK_DEFICIENT_PREFIX = 5,
  SQ_STATUS_SINGULAR_INPUT = 6,
  SQ_STATUS_DEFECTIVE_MATRIX = 7,
  SQ_STATUS_NOT_ADMISSIBLE = 8,
  SQ_STATUS_TRIANGULARIZATION_RESIDUAL = 9,
  SQ_STATUS_NOT_REALIZABLE = 10,
  SQ_STATUS_NOT_SYMPLECTIC = 11,
  SQ_STATUS_RESOLVENT_SINGULAR = 12,
  SQ_STATUS_VERIFICATION_FAILED = 13,
  SQ_STATUS_BUFFER_TOO_SMALL = 14,
  SQ_STATUS_INTERNAL = 15,
} SqStatus;

// Opaque cascade realization.
typedef struct SqCascade SqCascade;

// Opaque real matrix.
typedef struct SqMatrix SqMatrix;

// Opaque `(A, B, C, D)` system.
typedef struct SqQuadSystem SqQuadSystem;

// Basis-search settings. Non-positive tolerances select the defaults.
typedef struct SqSearchOptions {
  size_t max_attempts;
  uint64_t seed;
  double rank_tol;
  double zero_tol;
} SqSearchOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next call into this library from the same thread.
const char *sq_last_error(void);

struct SqSearchOptions sq_search_options_default(void);

// Copies a `rows x cols` row-major buffer into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` doubles and `out` must be writable.
enum SqStatus sq_matrix_new(size_t rows, size_t cols, const double *data, struct SqMatrix **out);

// # Safety
// `m` must be null or a handle from this library not yet freed.
void sq_matrix_free(struct SqMatrix *m);

// # Safety
// `m` must be a live handle or null.
size_t sq_matrix_rows(const struct SqMatrix *m);

// # Safety
// `m` must be a live handle or null.
size_t sq_matrix_cols(const struct SqMatrix *m);

// # Safety
// `m` must be a live handle and `out` writable.
enum SqStatus sq_matrix_get(const struct SqMatrix *m, size_t row, size_t col, double *out);

// Copies the matrix row-major into `buf`, which holds `len` doubles.
//
// # Safety
// `m` must be a live handle and `buf` valid for `len` writes.
enum SqStatus sq_matrix_copy(const struct SqMatrix *m, double *buf, size_t len);

// The `2n x 2n` symplectic form.
//
// # Safety
// `out` must be writable.
enum SqStatus sq_symplectic_form(size_t n, struct SqMatrix **out);

// # Safety
// `m` must be a live handle and `out` writable.
enum SqStatus sq_is_symplectic(const struct SqMatrix *m, double tol, bool *out);

// `V = S Y`. A non-positive `tol` selects the default. On
// [`SqStatus::RankDeficientPrefix`], `failing_prefix` (if non-null)
// receives the 1-based prefix index.
//
// # Safety
// `v` must be a live handle; `out_s` and `out_y` writable.
enum SqStatus sq_symplectic_qr(const struct SqMatrix *v,
                               double tol,
                               struct SqMatrix **out_s,
                               struct SqMatrix **out_y,
                               size_t *failing_prefix);

// `A = S⁻¹ U S`. `opts` and `basis_override` may be null.
//
// # Safety
// Handles must be live or null where allowed; outputs writable.
enum SqStatus sq_symplectic_schur(const struct SqMatrix *a,
                                  const struct SqSearchOptions *opts,
                                  const struct SqMatrix *basis_override,
                                  struct SqMatrix **out_s,
                                  struct SqMatrix **out_u);

// Builds a system from copies of the four matrices.
//
// # Safety
// All handles must be live; `out` writable.
enum SqStatus sq_quad_system_new(const struct SqMatrix *a,
                                 const struct SqMatrix *b,
                                 const struct SqMatrix *c,
                                 const struct SqMatrix *d,
                                 struct SqQuadSystem **out);

// # Safety
// `g` must be null or a live handle.
void sq_quad_system_free(struct SqQuadSystem *g);

// Writes the three relative realizability residuals and whether all are
// within `tol`.
//
// # Safety
// `g` must be live; `residuals` valid for 3 writes; `pass` writable.
enum SqStatus sq_check_realizability(const struct SqQuadSystem *g,
                                     double tol,
                                     double *residuals,
                                     bool *pass);

// Evaluates the `2m x 2m` transfer function at `re + i·im` into
// row-major real and imaginary buffers of `len` doubles each.
//
// # Safety
// `g` must be live; buffers valid for `len` writes.
enum SqStatus sq_transfer_function(const struct SqQuadSystem *g,
                                   double re,
                                   double im,
                                   double *out_re,
                                   double *out_im,
                                   size_t len);

// Pure cascade realization. `opts` and `basis_override` may be null.
//
// # Safety
// Handles must be live or null where allowed; `out` writable.
enum SqStatus sq_cascade_realize(const struct SqQuadSystem *g,
                                 const struct SqSearchOptions *opts,
                                 const struct SqMatrix *basis_override,
                                 struct SqCascade **out);

// # Safety
// `c` must be null or a live handle.
void sq_cascade_free(struct SqCascade *c);

// Number of one-mode stages, or 0 for a null handle.
//
// # Safety
// `c` must be null or a live handle.
size_t sq_cascade_len(const struct SqCascade *c);

// # Safety
// `c` must be live; `out` writable.
enum SqStatus sq_cascade_transform(const struct SqCascade *c, struct SqMatrix **out);

// The symmetric `2 x 2` Hamiltonian block of stage `k` (0-based).
//
// # Safety
// `c` must be live; `out` writable.
enum SqStatus sq_cascade_hamiltonian(const struct SqCascade *c, size_t k, struct SqMatrix **out);

// The `m x 2` coupling of stage `k` as row-major real and imaginary parts.
//
// # Safety
// `c` must be live; buffers valid for `len` writes.
enum SqStatus sq_cascade_coupling(const struct SqCascade *c,
                                  size_t k,
                                  double *out_re,
                                  double *out_im,
                                  size_t len);

// Largest relative transfer-function deviation found during verification.
//
// # Safety
// `c` must be live; `out` writable.
enum SqStatus sq_cascade_max_deviation(const struct SqCascade *c, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMPCASCADE_H */
