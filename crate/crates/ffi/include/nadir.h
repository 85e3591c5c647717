#ifndef NADIR_H
#define NADIR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NadirStatus {
  NADIR_STATUS_OK = 0,
  NADIR_STATUS_NULL_ARGUMENT = 1,
  NADIR_STATUS_INVALID_UTF8 = 2,
  NADIR_STATUS_INVALID_INPUT = 3,
  NADIR_STATUS_COMPUTATION = 4,
  NADIR_STATUS_PANIC = 5,
} NadirStatus;

typedef enum NadirFrobeniusOp {
  NADIR_FROBENIUS_OP_PUSH = 0,
  NADIR_FROBENIUS_OP_PULL = 1,
  NADIR_FROBENIUS_OP_ANTECEDENT = 2,
} NadirFrobeniusOp;

// Opaque differential module.
typedef struct NadirModule NadirModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *nadir_last_error(void);

// Parses a module from JSON and checks integrability.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum NadirStatus nadir_module_from_json(const char *json, struct NadirModule **out);

// # Safety
// `module` must come from [`nadir_module_from_json`] and not be freed twice.
void nadir_module_free(struct NadirModule *module);

// # Safety
// `module` must be a live handle; `out` must be writable.
enum NadirStatus nadir_module_rank(const struct NadirModule *module, uintptr_t *out);

// Extrinsic log-radii along `axis` (e.g. `"t1"`) at the fiber `radius`,
// given as comma-separated rationals `f_k = −log_p r_k`.
// Output: `{"kind": …, "entries": [[value, multiplicity, capped], …]}`.
//
// # Safety
// Pointers must be valid; release `*out` with [`nadir_string_free`].
enum NadirStatus nadir_visible_radii_json(const struct NadirModule *module,
                                          const char *axis,
                                          const char *radius,
                                          char **out);

// CSV profile along geometric variable `var` (0-based) on `[lo, hi]`.
// `kind` is an axis name or `"intrinsic"`; `frozen` fixes the other radii.
//
// # Safety
// Pointers must be valid; release `*out` with [`nadir_string_free`].
enum NadirStatus nadir_profile_csv(const struct NadirModule *module,
                                   const char *kind,
                                   uintptr_t var,
                                   const char *lo,
                                   const char *hi,
                                   const char *frozen,
                                   char **out);

// Frobenius transform of an intrinsic multiset given as
// `{"p": 2, "entries": [["1/2", 1], …]}`.
//
// # Safety
// Pointers must be valid; release `*out` with [`nadir_string_free`].
enum NadirStatus nadir_frobenius_json(const char *multiset, enum NadirFrobeniusOp op, char **out);

// # Safety
// `s` must come from this library and not be freed twice.
void nadir_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NADIR_H */
