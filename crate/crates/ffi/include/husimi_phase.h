#ifndef HUSIMI_PHASE_H
#define HUSIMI_PHASE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_POINTER = 1,
  /**
   * Bad parameter values or an unknown preset.
   */
  HP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Parameters outside the region where the formulas converge.
   */
  HP_STATUS_DOMAIN = 3,
  /**
   * Internal numerical failure.
   */
  HP_STATUS_COMPUTATION = 4,
  /**
   * The output buffer is shorter than required.
   */
  HP_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  HP_STATUS_PANIC = 6,
} HpStatus;

/**
 * Q-function representation of a heralded squeezed state.
 */
typedef struct HpState HpState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Single-mode squeezed vacuum with `k` photons injected and `l` detected at
 * a beam splitter of transmissivity `tau`.
 */
enum HpStatus hp_state_single(double lambda,
                              uint32_t k,
                              uint32_t l,
                              double tau,
                              struct HpState **out);

/**
 * Two-mode squeezed vacuum with an independent operation on each mode.
 */
enum HpStatus hp_state_two(double lambda,
                           uint32_t k1,
                           uint32_t l1,
                           double tau1,
                           uint32_t k2,
                           uint32_t l2,
                           double tau2,
                           struct HpState **out);

/**
 * Named preset such as `"sym-ps:2"`; `tau` applies to every operated mode.
 *
 * # Safety
 * `name` must be a NUL-terminated string.
 */
enum HpStatus hp_state_preset(const char *name, double lambda, double tau, struct HpState **out);

/**
 * New state after amplitude damping at per-mode rates for time `t`
 * (`gamma2` is ignored for single-mode states).
 *
 * # Safety
 * `state` must come from an `hp_state_*` constructor.
 */
enum HpStatus hp_state_damp(const struct HpState *state,
                            double gamma1,
                            double gamma2,
                            double t,
                            struct HpState **out);

/**
 * Releases a state. Null is accepted.
 *
 * # Safety
 * `state` must come from an `hp_state_*` constructor and not be used again.
 */
void hp_state_free(struct HpState *state);

/**
 * Number of modes (1 or 2), or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or come from an `hp_state_*` constructor.
 */
uint32_t hp_state_modes(const struct HpState *state);

/**
 * Q at a phase-space point of length `2 × modes`.
 *
 * # Safety
 * `xi` must point to `len` doubles and `out` to one double.
 */
enum HpStatus hp_q(const struct HpState *state, const double *xi, size_t len, double *out);

/**
 * Single-mode phase distribution at `theta`.
 *
 * # Safety
 * `out` must point to one double.
 */
enum HpStatus hp_phase(const struct HpState *state, double theta, double *out);

/**
 * Two-mode phase distribution at `(theta1, theta2)`.
 *
 * # Safety
 * `out` must point to one double.
 */
enum HpStatus hp_phase_two(const struct HpState *state, double theta1, double theta2, double *out);

/**
 * Phase distribution on the closed grid `θᵢ = −π + 2πi/(points−1)`
 * (two-mode states: over `θ₊` with `θ₁ = θ₂ = θ₊/2`). Writes `points` values
 * and, when `summary` is non-null, `[peak θ, width, normalization residual]`.
 *
 * # Safety
 * `values` must hold `capacity` doubles; `summary` is null or holds 3.
 */
enum HpStatus hp_phase_grid(const struct HpState *state,
                            size_t points,
                            double *values,
                            size_t capacity,
                            double *summary);

/**
 * Windowed second-moment width of a single-mode distribution about
 * `center`.
 *
 * # Safety
 * `out` must point to one double.
 */
enum HpStatus hp_width(const struct HpState *state, double center, double *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or hold `len` bytes.
 */
size_t hp_last_error(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HUSIMI_PHASE_H */
