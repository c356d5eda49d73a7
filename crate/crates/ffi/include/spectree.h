#ifndef SPECTREE_H
#define SPECTREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpectreeMapKind {
  SpectreeMapKind_Identity = 0,
  SpectreeMapKind_Parent = 1,
  /**
   * `param` levels up, clamped at the root.
   */
  SpectreeMapKind_LevelShift = 2,
  /**
   * Level n to level n^2 on the largest supported domain; `param` ignored.
   */
  SpectreeMapKind_DepthSquare = 3,
} SpectreeMapKind;

typedef enum SpectreeStatus {
  SpectreeStatus_Ok = 0,
  SpectreeStatus_NullPointer = 1,
  SpectreeStatus_InvalidUtf8 = 2,
  SpectreeStatus_InvalidArgument = 3,
  /**
   * Malformed spec document or inconsistent tree, weight or map.
   */
  SpectreeStatus_Validation = 4,
  /**
   * The operation needs p = 2.
   */
  SpectreeStatus_RequiresHilbert = 5,
  SpectreeStatus_BufferTooSmall = 6,
  /**
   * Dense oracle over its size cap or not converged.
   */
  SpectreeStatus_Oracle = 7,
  SpectreeStatus_Panic = 99,
} SpectreeStatus;

typedef enum SpectreeWeightFamily {
  /**
   * `param` is the constant.
   */
  SpectreeWeightFamily_Constant = 0,
  /**
   * `1 / (1 + depth)`; `param` ignored.
   */
  SpectreeWeightFamily_ReciprocalDepth = 1,
  /**
   * `param^depth`.
   */
  SpectreeWeightFamily_Geometric = 2,
} SpectreeWeightFamily;

/**
 * Opaque operator handle.
 */
typedef struct SpectreeOperator SpectreeOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds an operator on the complete `branching`-ary tree of depth `depth`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SpectreeStatus spectree_operator_new_bary(uintptr_t branching,
                                               uintptr_t depth,
                                               enum SpectreeWeightFamily weight,
                                               double weight_param,
                                               enum SpectreeMapKind map,
                                               uintptr_t map_param,
                                               double p,
                                               struct SpectreeOperator **out);

/**
 * Builds the operator a spec document describes at truncation depth
 * `depth`. Relative file references resolve against `base_dir`, or the
 * working directory when it is null.
 *
 * # Safety
 * `json` must be a NUL-terminated string, `base_dir` null or
 * NUL-terminated, and `out` writable.
 */
enum SpectreeStatus spectree_operator_from_spec_json(const char *json,
                                                     const char *base_dir,
                                                     uintptr_t depth,
                                                     struct SpectreeOperator **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `op` must come from a constructor above and not have been freed.
 */
void spectree_operator_free(struct SpectreeOperator *op);

/**
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SpectreeStatus spectree_operator_vertex_count(const struct SpectreeOperator *op,
                                                   uintptr_t *out);

/**
 * `max_v weight(v) / weight(map(v))`.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SpectreeStatus spectree_beta(const struct SpectreeOperator *op, double *out);

/**
 * Exact operator norm on the truncation.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SpectreeStatus spectree_norm_exact(const struct SpectreeOperator *op, double *out);

/**
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SpectreeStatus spectree_is_isometry(const struct SpectreeOperator *op,
                                         double ratio_tol,
                                         bool *out);

/**
 * Hilbert-Schmidt norm (p = 2 only).
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SpectreeStatus spectree_hs_norm(const struct SpectreeOperator *op, double *out);

/**
 * `sum mu_n^q` (p = 2, q >= 1).
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SpectreeStatus spectree_schatten_sum(const struct SpectreeOperator *op, double q, double *out);

/**
 * # Safety
 * `op` must be a live handle; `out_trace` and `out_fixed_points` writable.
 */
enum SpectreeStatus spectree_trace(const struct SpectreeOperator *op,
                                   double *out_trace,
                                   uintptr_t *out_fixed_points);

/**
 * Analytic singular values, descending, one per vertex (p = 2).
 *
 * # Safety
 * `op` must be a live handle, `buf` valid for `capacity` doubles, `out_len` writable.
 */
enum SpectreeStatus spectree_singular_values(const struct SpectreeOperator *op,
                                             double *buf,
                                             uintptr_t capacity,
                                             uintptr_t *out_len);

/**
 * Dense-SVD singular values, descending (p = 2, at most `dense_cap` vertices).
 *
 * # Safety
 * As for [`spectree_singular_values`].
 */
enum SpectreeStatus spectree_oracle_singular_values(const struct SpectreeOperator *op,
                                                    uintptr_t dense_cap,
                                                    double *buf,
                                                    uintptr_t capacity,
                                                    uintptr_t *out_len);

/**
 * Compactness tail `s_N` for `N = 0..=D`.
 *
 * # Safety
 * As for [`spectree_singular_values`].
 */
enum SpectreeStatus spectree_compactness_tail(const struct SpectreeOperator *op,
                                              double *buf,
                                              uintptr_t capacity,
                                              uintptr_t *out_len);

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *spectree_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTREE_H */
