/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef HELIDEC_H
#define HELIDEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HdStatus {
  HD_STATUS_OK = 0,
  HD_STATUS_NULL_POINTER = 1,
  HD_STATUS_INVALID_PARAMETER = 2,
  HD_STATUS_INVALID_GRID = 3,
  HD_STATUS_EMPTY_BAND = 4,
  HD_STATUS_ZERO_WAVE_VECTOR = 5,
  HD_STATUS_DEGENERATE_AXIS = 6,
  HD_STATUS_FORCING_OUTSIDE_TRUNCATION = 7,
  HD_STATUS_NON_FINITE = 8,
  HD_STATUS_CONFIG = 9,
  HD_STATUS_BAD_MAGIC = 10,
  HD_STATUS_VERSION_MISMATCH = 11,
  HD_STATUS_TRUNCATED_FILE = 12,
  HD_STATUS_INCONSISTENT_GRID = 13,
  HD_STATUS_IO = 14,
  HD_STATUS_PANIC = 15,
} HdStatus;

// Opaque dynamics: viscosity, forcing and the transform plans for one mode set.
typedef struct HdDynamics HdDynamics;

// Opaque spectral state.
typedef struct HdState HdState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *hd_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *hd_version(void);

// Random state on cutoff `n` (`|k_i| <= n`) with amplitudes `|k|^exponent`
// inside `band_lo <= |k| <= band_hi`, rescaled to energy 0.5.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum HdStatus hd_state_random(size_t n,
                              double exponent,
                              double band_lo,
                              double band_hi,
                              uint64_t seed,
                              struct HdState **out);

// Deep copy of a state.
//
// # Safety
// `state` must be a live handle or NULL; `out` must be writable.
enum HdStatus hd_state_clone(const struct HdState *state, struct HdState **out);

// # Safety
// `state` must be NULL or a handle not yet freed.
void hd_state_free(struct HdState *state);

// Number of stored half-lattice modes, or 0 for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
size_t hd_state_mode_count(const struct HdState *state);

// Cutoff `N` of the state's grid, or 0 for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
size_t hd_state_cutoff(const struct HdState *state);

// Simulation time carried by the state; NaN for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
double hd_state_time(const struct HdState *state);

// `Σ|u+|²` over the full lattice; NaN for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
double hd_state_energy(const struct HdState *state);

// `Σ|k||u+|²` over the full lattice; NaN for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
double hd_state_helicity(const struct HdState *state);

// `Σ|k|³|u+|²` over the full lattice; NaN for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
double hd_state_dissipation(const struct HdState *state);

// Sobolev norm `(Σ|k|^{2s}|u+|²)^{1/2}`; NaN for NULL.
//
// # Safety
// `state` must be a live handle or NULL.
double hd_state_norm_hs(const struct HdState *state, double s);

// Writes the stored wavevectors as `len` triples `(kx, ky, kz)` into `k`.
//
// # Safety
// `k` must point to `3 * len` writable `int32_t`.
enum HdStatus hd_state_wavevectors(const struct HdState *state, int32_t *k, size_t len);

// Copies the amplitudes into `re` and `im`, each of length `len`.
//
// # Safety
// `re` and `im` must each point to `len` writable doubles.
enum HdStatus hd_state_get_amplitudes(const struct HdState *state,
                                      double *re,
                                      double *im,
                                      size_t len);

// Overwrites the amplitudes from `re` and `im`, each of length `len`.
//
// # Safety
// `re` and `im` must each point to `len` readable doubles.
enum HdStatus hd_state_set_amplitudes(struct HdState *state,
                                      const double *re,
                                      const double *im,
                                      size_t len);

// Reads a checkpoint; the stored viscosity goes to `nu` when non-NULL.
//
// # Safety
// `path` must be a NUL-terminated string; `out` writable; `nu` NULL or writable.
enum HdStatus hd_checkpoint_read(const char *path, struct HdState **out, double *nu);

// # Safety
// `state` must be a live handle; `path` a NUL-terminated string.
enum HdStatus hd_checkpoint_write(const struct HdState *state, double nu, const char *path);

// Dynamics on the mode set of `like`. `force_amp = 0` means unforced;
// otherwise forcing fills `force_lo <= |k| <= force_hi` with total
// `Σ|f+|² = force_amp²` and random phases drawn from `seed`.
//
// # Safety
// `like` must be a live handle; `out` writable.
enum HdStatus hd_dynamics_new(const struct HdState *like,
                              double nu,
                              double force_lo,
                              double force_hi,
                              double force_amp,
                              uint64_t seed,
                              struct HdDynamics **out);

// # Safety
// `dynamics` must be NULL or a handle not yet freed.
void hd_dynamics_free(struct HdDynamics *dynamics);

// Advances `state` in place by `steps` integrating-factor RK4 steps of `dt`.
// On `HD_STATUS_NON_FINITE` the state holds the last finite step.
//
// # Safety
// Both handles must be live; `state` must share the dynamics' mode set.
enum HdStatus hd_dynamics_step(const struct HdDynamics *dynamics,
                               struct HdState *state,
                               double dt,
                               uint64_t steps);

// Time derivative `du+/dt` (nonlinear, viscous and forcing terms) into a new
// handle.
//
// # Safety
// Both input handles must be live; `out` writable.
enum HdStatus hd_dynamics_rhs(const struct HdDynamics *dynamics,
                              const struct HdState *state,
                              struct HdState **out);

// Normalized residuals of the energy and helicity budgets at `state`.
//
// # Safety
// Both handles must be live; `energy` and `helicity` writable.
enum HdStatus hd_dynamics_budget_residuals(const struct HdDynamics *dynamics,
                                           const struct HdState *state,
                                           double *energy,
                                           double *helicity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HELIDEC_H */
