#ifndef TACHYON_BOUND_H
#define TACHYON_BOUND_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum TbStatus {
  TB_STATUS_OK = 0,
  // A physics precondition failed (β ≥ 1, ρ outside (0, 1), ...).
  TB_STATUS_DOMAIN = 1,
  // Malformed input: unknown preset, bad unit, invalid JSON config.
  TB_STATUS_CONFIG = 2,
  // The measurement schedule is invalid.
  TB_STATUS_SCHEDULE = 3,
  // Too few events to form an estimate.
  TB_STATUS_INSUFFICIENT_STATISTICS = 4,
  // The simulated campaign saw a drop, so no bound exists.
  TB_STATUS_DROP_DETECTED = 5,
  // A required pointer was NULL.
  TB_STATUS_NULL_POINTER = 6,
  // A string argument was not valid UTF-8.
  TB_STATUS_INVALID_UTF8 = 7,
  // The simulation has not been run yet.
  TB_STATUS_NOT_RUN = 8,
  // Internal error; the library caught a panic.
  TB_STATUS_PANIC = 9,
} TbStatus;

// A named experiment preset.
typedef struct TbPreset TbPreset;

// A configured simulation and, once run, its results.
typedef struct TbSimulation TbSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL if none.
const char *tb_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *tb_version(void);

// Lower bound β_t,max for path-mismatch ratio `rho`, measurement duration
// `delta_t`, rotation rate `omega` and a frame moving at `beta` with
// orientation angle `chi`. Writes `INFINITY` when the result overflows.
//
// # Safety
// `out` must be NULL or valid for writing one double.
enum TbStatus tb_eval_bound(double rho,
                            double delta_t,
                            double omega,
                            double beta,
                            double chi,
                            double *out);

// The δt → 0 limit √(1 − β²)/ρ.
//
// # Safety
// `out` must be NULL or valid for writing one double.
enum TbStatus tb_fast_limit(double rho, double beta, double *out);

// Measurement duration 2ρ/ω below which the bound is flat in β.
//
// # Safety
// `out` must be NULL or valid for writing one double.
enum TbStatus tb_regime_threshold_dt(double rho, double omega, double *out);

// Coherence length 2 ln2 λ²/(π Δλ) in meters.
//
// # Safety
// `out` must be NULL or valid for writing one double.
enum TbStatus tb_coherence_length(double lambda, double dlambda, double *out);

// Fraction of frame directions a baseline at polar angle `alpha` can never
// test, 1 − sin α.
//
// # Safety
// `out` must be NULL or valid for writing one double.
enum TbStatus tb_inaccessible_fraction(double alpha, double *out);

// Looks up a named preset (`ego_red`, `ego_green`, `tabletop_blue`).
//
// # Safety
// `name` must be NULL or a NUL-terminated string; `out` must be NULL or
// valid for writing one pointer.
enum TbStatus tb_preset_new(const char *name, struct TbPreset **out);

// Releases a preset.
//
// # Safety
// `preset` must be NULL or a handle from [`tb_preset_new`] not yet freed.
void tb_preset_free(struct TbPreset *preset);

// Path-mismatch ratio ρ of a preset.
//
// # Safety
// `preset` must be NULL or a live handle; `out` NULL or writable.
enum TbStatus tb_preset_rho(const struct TbPreset *preset, double *out);

// Effective measurement duration δt of a preset, seconds.
//
// # Safety
// `preset` must be NULL or a live handle; `out` NULL or writable.
enum TbStatus tb_preset_delta_t(const struct TbPreset *preset, double *out);

// Bound of a preset at the CMB frame.
//
// # Safety
// `preset` must be NULL or a live handle; `out` NULL or writable.
enum TbStatus tb_preset_cmb_bound(const struct TbPreset *preset, double *out);

// Samples a preset's bound curve at `n` strictly increasing β values.
// Samples that cannot be evaluated are written as NaN.
//
// # Safety
// `betas` must point to `n` readable doubles and `out` to `n` writable
// doubles; `preset` must be NULL or a live handle.
enum TbStatus tb_preset_curve(const struct TbPreset *preset,
                              const double *betas,
                              size_t n,
                              double *out);

// Builds a simulation from a JSON config (same format as the CLI's
// `simulate --config`). `seed` overrides any seed in the config.
//
// # Safety
// `json` must be NULL or a NUL-terminated string; `out` must be NULL or
// valid for writing one pointer.
enum TbStatus tb_simulation_from_json(const char *json, uint64_t seed, struct TbSimulation **out);

// Releases a simulation.
//
// # Safety
// `sim` must be NULL or a handle from [`tb_simulation_from_json`] not yet
// freed.
void tb_simulation_free(struct TbSimulation *sim);

// Runs the simulation. Results are deterministic for a given seed.
//
// # Safety
// `sim` must be NULL or a live handle, not used concurrently.
enum TbStatus tb_simulation_run(struct TbSimulation *sim);

// Bell parameter S pooled over all bins and its standard error.
//
// # Safety
// `sim` must be NULL or a live handle; out-pointers NULL or writable.
enum TbStatus tb_simulation_s(struct TbSimulation *sim, double *s, double *stderr);

// Number of bins flagged as drops.
//
// # Safety
// `sim` must be NULL or a live handle; `out` NULL or writable.
enum TbStatus tb_simulation_drop_count(struct TbSimulation *sim, size_t *out);

// Bound established by the simulated campaign. Returns
// `TB_STATUS_DROP_DETECTED` if any bin dropped.
//
// # Safety
// `sim` must be NULL or a live handle; `out` NULL or writable.
enum TbStatus tb_simulation_bound(struct TbSimulation *sim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TACHYON_BOUND_H */
