#ifndef DIPEPS_H
#define DIPEPS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DipepsStatus {
  DipepsStatus_Ok = 0,
  DipepsStatus_NullPointer = 1,
  DipepsStatus_InvalidInput = 2,
  DipepsStatus_NumericalFailure = 3,
  DipepsStatus_Panic = 4,
} DipepsStatus;

/**
 * Opaque tensor handle; release with `dipeps_tensor_free`.
 */
typedef struct DipepsTensor DipepsTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Random DI tensor (chi = 1 or 2), deterministic in `seed`.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum DipepsStatus dipeps_random_di(uintptr_t d,
                                   uintptr_t chi,
                                   uint64_t seed,
                                   struct DipepsTensor **out);

/**
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum DipepsStatus dipeps_toric_code(struct DipepsTensor **out);

/**
 * Parse a tensor from the JSON file format `{"d", "chi", "data": [[re, im], ...]}`.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string; `out` must be null or valid for a pointer write.
 */
enum DipepsStatus dipeps_tensor_from_json(const char *json, struct DipepsTensor **out);

/**
 * # Safety
 * `t` must be null or a handle from this library that has not been freed.
 */
void dipeps_tensor_free(struct DipepsTensor *t);

/**
 * # Safety
 * All pointers must be non-null and valid; `t` must be a live handle.
 */
enum DipepsStatus dipeps_tensor_dims(const struct DipepsTensor *t, uintptr_t *d, uintptr_t *chi);

/**
 * Isometric and dual-isometric residuals; `pass` is set when both are within `tol`.
 *
 * # Safety
 * All pointers must be non-null and valid; `t` must be a live handle.
 */
enum DipepsStatus dipeps_check_di(const struct DipepsTensor *t,
                                  double tol,
                                  double *residual_iso,
                                  double *residual_dual,
                                  bool *pass);

/**
 * Real parameter counts of the DI manifold, normal PEPS tensors and the physical state.
 *
 * # Safety
 * Out-pointers must be non-null and valid.
 */
enum DipepsStatus dipeps_param_counts(uint64_t d,
                                      uint64_t chi,
                                      uint64_t *di,
                                      uint64_t *normal_peps,
                                      uint64_t *state);

/**
 * Leading eigenvalue modulus of the Z2 transfer operator on a ring of `m` sites, restricted to one parity block.
 *
 * # Safety
 * `out` must be non-null and valid.
 */
enum DipepsStatus dipeps_transfer_leading(double alpha,
                                          double beta,
                                          uintptr_t m,
                                          bool flux_pi,
                                          bool odd_parity,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIPEPS_H */
