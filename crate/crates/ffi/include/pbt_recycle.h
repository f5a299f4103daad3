#ifndef PBT_RECYCLE_H
#define PBT_RECYCLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum PbtStatus {
  PBT_STATUS_OK = 0,
  PBT_STATUS_NULL_POINTER = 1,
  PBT_STATUS_INVALID_ARGUMENT = 2,
  PBT_STATUS_DIMENSION_CAP = 3,
  PBT_STATUS_INVALID_COEFFICIENTS = 4,
  PBT_STATUS_NUMERICAL = 5,
  PBT_STATUS_IO = 6,
  PBT_STATUS_UTF8 = 7,
  PBT_STATUS_PANIC = 8,
} PbtStatus;

// Opaque coefficient set `{v_μ}` for one `(N, d)`.
typedef struct PbtCoefficients PbtCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *pbt_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pbt_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void pbt_string_free(char *s);

// Recycling fidelity of the non-optimal protocol.
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_frec(uint32_t ports, uint32_t d, double *out);

// Qubit closed form of [`pbt_frec`].
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_frec_qubit(uint32_t ports, double *out);

// `tr(√Π_N V′)` for the square-root measurement.
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_trace_sqrt_povm_signal(uint32_t ports, uint32_t d, double *out);

// `1 - 2k(1 - f1)`; negative values are returned as is.
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_kround_lower_bound(double f1, uint32_t rounds, double *out);

// Recycling fidelity of the optimal protocol for arbitrary coefficients.
//
// # Safety
// Handles must be live; `out` must be valid for writes.
enum PbtStatus pbt_frec_optimal(uint32_t ports,
                                uint32_t d,
                                const struct PbtCoefficients *v_n,
                                const struct PbtCoefficients *v_nm1,
                                double *out);

// Optimal-protocol recycling fidelity at `d = 2`.
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_frec_optimal_qubit(uint32_t ports, double *out);

// Overlap between the optimal and non-optimal resource states.
//
// # Safety
// `v` must be live; `out` must be valid for writes.
enum PbtStatus pbt_resource_fidelity(uint32_t ports,
                                     uint32_t d,
                                     const struct PbtCoefficients *v,
                                     double *out);

// Qubit resource-state overlap in the angular-momentum parametrization.
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_resource_fidelity_qubit_angular(uint32_t ports, double *out);

// Non-optimal recycling fidelity from explicit matrices (small sizes only).
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_frec_oracle(uint32_t ports, uint32_t d, double *out);

// Run the oracle verification suite. `passed` receives the verdict and
// `report_json` a string to release with [`pbt_string_free`].
//
// # Safety
// Out-pointers must be valid for writes.
enum PbtStatus pbt_oracle_verify(uint32_t ports,
                                 uint32_t d,
                                 double tolerance,
                                 bool *passed,
                                 char **report_json);

// Qubit optimal coefficients in closed form.
//
// # Safety
// `out` must be valid for writes.
enum PbtStatus pbt_coefficients_qubit(uint32_t ports, struct PbtCoefficients **out);

// Parse and validate a coefficient document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum PbtStatus pbt_coefficients_from_json(const char *json, struct PbtCoefficients **out);

// Serialize a coefficient set; release the result with [`pbt_string_free`].
//
// # Safety
// `v` must be live; `out` must be valid for writes.
enum PbtStatus pbt_coefficients_to_json(const struct PbtCoefficients *v, char **out);

// Number of frames in a coefficient set.
//
// # Safety
// `v` must be live; `out` must be valid for writes.
enum PbtStatus pbt_coefficients_len(const struct PbtCoefficients *v, size_t *out);

// Release a coefficient handle. Null is ignored.
//
// # Safety
// `v` must come from this library and not have been freed.
void pbt_coefficients_free(struct PbtCoefficients *v);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBT_RECYCLE_H */
