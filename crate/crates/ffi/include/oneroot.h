#ifndef ONEROOT_H
#define ONEROOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OrMeasure {
  OR_MEASURE_CONCURRENCE = 0,
  OR_MEASURE_SQRT_THREE_TANGLE = 1,
} OrMeasure;

typedef enum OrStatus {
  OR_STATUS_OK = 0,
  // The state is valid but not one-root.
  OR_STATUS_NOT_ONE_ROOT = 1,
  OR_STATUS_INVALID_INPUT = 2,
  OR_STATUS_DIMENSION_MISMATCH = 3,
  // Every state in the range has zero entanglement.
  OR_STATUS_RANGE_VANISHES = 4,
  OR_STATUS_NUMERICAL = 5,
  OR_STATUS_NULL_POINTER = 6,
  OR_STATUS_PANIC = 7,
} OrStatus;

// Root certificate together with the basis it was computed in.
typedef struct OrCertificate OrCertificate;

// Rank-2 density matrix.
typedef struct OrState OrState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until
// the next failing call on the same thread.
const char *or_last_error(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed.
void or_string_free(char *s);

// Measure of a pure state with `2^m` interleaved amplitudes.
//
// # Safety
// `amps` must point to `2^(m+1)` doubles and `out` be writable.
enum OrStatus or_measure_pure(enum OrMeasure measure, uintptr_t m, const double *amps, double *out);

// Rank-2 state from orthonormal `phi0`, `phi1` (each `2^m` interleaved
// amplitudes) and Bloch coordinates `(r, theta, phi)`.
//
// # Safety
// `phi0` and `phi1` must each point to `2^(m+1)` doubles; `out` must be writable.
enum OrStatus or_state_new(uintptr_t m,
                           const double *phi0,
                           const double *phi1,
                           double r,
                           double theta,
                           double phi,
                           struct OrState **out);

// Rank-2 state from a row-major `2^m x 2^m` interleaved density matrix.
//
// # Safety
// `rho` must point to `2 * 4^m` doubles; `out` must be writable.
enum OrStatus or_state_from_density(uintptr_t m, const double *rho, struct OrState **out);

// # Safety
// `state` must come from `or_state_new`/`or_state_from_density` and not have been freed.
void or_state_free(struct OrState *state);

// # Safety
// `state` must be a live handle.
uintptr_t or_state_qubits(const struct OrState *state);

// Certifies the one-root property. Succeeds with a certificate whether or
// not the state is one-root; query it with `or_certificate_is_one_root`.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum OrStatus or_certify(const struct OrState *state,
                         enum OrMeasure measure,
                         struct OrCertificate **out);

// # Safety
// `cert` must come from `or_certify` and not have been freed.
void or_certificate_free(struct OrCertificate *cert);

// # Safety
// `cert` must be a live handle.
bool or_certificate_is_one_root(const struct OrCertificate *cert);

// Number of distinct roots on the projective line.
//
// # Safety
// `cert` must be a live handle.
uintptr_t or_certificate_cluster_count(const struct OrCertificate *cert);

// `N = E(|z'>) / 4`; fails with `NotOneRoot` otherwise.
//
// # Safety
// `cert` must be a live handle; `out` must be writable.
enum OrStatus or_certificate_n(const struct OrCertificate *cert, double *out);

// Unit Bloch vector of the root in the basis of `state`.
//
// # Safety
// Both handles must be live; `out` must point to 3 writable doubles.
enum OrStatus or_certificate_root_direction(const struct OrCertificate *cert,
                                            const struct OrState *state,
                                            double *out);

// Certificate as a JSON object; free the string with `or_string_free`.
//
// # Safety
// `cert` must be a live handle; `out` must be writable.
enum OrStatus or_certificate_to_json(const struct OrCertificate *cert, char **out);

// Exact roof of a certified one-root state.
//
// # Safety
// Both handles must be live; `out` must be writable.
enum OrStatus or_closed_form(const struct OrState *state,
                             const struct OrCertificate *cert,
                             double *out);

// Brute-force roof: `restarts` local searches per ensemble size `2..=nu_max`.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum OrStatus or_oracle(const struct OrState *state,
                        enum OrMeasure measure,
                        uintptr_t restarts,
                        uintptr_t nu_max,
                        uint64_t seed,
                        double *out);

// Two-qubit mixed-state concurrence.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum OrStatus or_wootters(const struct OrState *state, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEROOT_H */
