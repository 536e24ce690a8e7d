#ifndef HDKG_H
#define HDKG_H

/* Generated by cbindgen from the hdkg-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
enum HdkgStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  // The call succeeded and all out-parameters are filled.
  HDKG_STATUS_OK = 0,
  // A required pointer argument was null.
  HDKG_STATUS_NULL_ARGUMENT = 1,
  // A parameter failed validation (range, parity, sign, size).
  HDKG_STATUS_INVALID_ARGUMENT = 2,
  // The computation hit a mathematical obstruction (pole on the
  // evaluation path, shell collision, amplification guard).
  HDKG_STATUS_OBSTRUCTION = 3,
  // An internal cross-check failed; a bug in the library, not bad input.
  HDKG_STATUS_INTERNAL = 4,
  // A caller-supplied buffer is too small for the result.
  HDKG_STATUS_INSUFFICIENT_BUFFER = 5,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum HdkgStatus HdkgStatus;
#else
typedef int32_t HdkgStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Which operator symbol a call evaluates.
enum HdkgSymbolKind
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  // Truncated polynomial symbol of the given derivative order.
  HDKG_SYMBOL_KIND_FINITE = 0,
  // Formal full exponential symbol.
  HDKG_SYMBOL_KIND_INFINITE = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum HdkgSymbolKind HdkgSymbolKind;
#else
typedef int32_t HdkgSymbolKind;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// How propagator evaluation passes the real mass-shell pole.
enum HdkgContour
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  // Bare real evaluation; points near the pole are refused.
  HDKG_CONTOUR_BARE = 0,
  // Principal-value prescription.
  HDKG_CONTOUR_PRINCIPAL_VALUE = 1,
  // Shift into the complex plane by +i eps.
  HDKG_CONTOUR_FEYNMAN_EPS = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum HdkgContour HdkgContour;
#else
typedef int32_t HdkgContour;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Opaque single-mode dynamics handle.
typedef struct HdkgModeOde HdkgModeOde;

// Opaque root census handle.
typedef struct HdkgRootReport HdkgRootReport;

// Opaque integrated-trajectory handle.
typedef struct HdkgTrajectory HdkgTrajectory;

// Complex number in Cartesian form.
typedef struct HdkgComplex {
  double re;
  double im;
} HdkgComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static name for a status code, for logging; never null.
const char *hdkg_status_name(HdkgStatus status);

// Copies the calling thread's most recent failure message into `buf` as a
// NUL-terminated string, truncating if needed, and returns the size the
// full message requires including the terminator. `buf` may be null to
// query the size alone.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be null.
size_t hdkg_last_error_message(char *buf, size_t cap);

// Runs the root census for the given derivative order and hands back an
// owned report. Release with `hdkg_root_report_free`.
//
// # Safety
// `out` must be a valid pointer to a report-handle slot.
HdkgStatus hdkg_root_report_compute(uint32_t order, struct HdkgRootReport **out);

// Releases a report handle; accepts null.
//
// # Safety
// `report` must come from `hdkg_root_report_compute` and not have been
// freed already.
void hdkg_root_report_free(struct HdkgRootReport *report);

// Derivative order the report was computed for; 0 for a null handle.
//
// # Safety
// `report` must be a live report handle or null.
uint32_t hdkg_root_report_order(const struct HdkgRootReport *report);

// Exact count of real dispersion roots; 0 for a null handle.
//
// # Safety
// `report` must be a live report handle or null.
size_t hdkg_root_report_sturm_count(const struct HdkgRootReport *report);

// Number of entries `hdkg_root_report_real_roots` will write; 0 for a
// null handle.
//
// # Safety
// `report` must be a live report handle or null.
size_t hdkg_root_report_real_root_count(const struct HdkgRootReport *report);

// Copies the certified real roots into `buf`.
//
// # Safety
// `report` must be a live report handle or null; `buf` must point to `cap`
// writable doubles.
HdkgStatus hdkg_root_report_real_roots(const struct HdkgRootReport *report,
                                       double *buf,
                                       size_t cap);

// Copies the full complex root set into `buf`; the count equals the
// report's order.
//
// # Safety
// `report` must be a live report handle or null; `buf` must point to `cap`
// writable complex slots.
HdkgStatus hdkg_root_report_complex_roots(const struct HdkgRootReport *report,
                                          struct HdkgComplex *buf,
                                          size_t cap);

// Writes the positive real root that fixes the mass shell. Fails with
// InvalidArgument at even orders, which have no real root.
//
// # Safety
// `report` must be a live report handle or null; `out` must be a valid
// double pointer.
HdkgStatus hdkg_root_report_mass_shell(const struct HdkgRootReport *report, double *out);

// Writes the physical mass sqrt(q_N) / a for an odd order.
//
// # Safety
// `out` must be a valid double pointer.
HdkgStatus hdkg_mass_scale(uint32_t order, double a, double *out);

// Writes the operator symbol value at the given momentum-space point.
//
// # Safety
// `out` must be a valid double pointer.
HdkgStatus hdkg_symbol_value(uint32_t order,
                             double a,
                             HdkgSymbolKind kind,
                             double p_squared,
                             double *out);

// Writes the momentum-space propagator value at `p_squared`. `eps` is
// consumed only by the FeynmanEps contour, which requires it positive.
// Near-pole bare evaluation fails with Obstruction.
//
// # Safety
// `out` must be a valid complex pointer.
HdkgStatus hdkg_propagator_value(uint32_t order,
                                 double a,
                                 HdkgSymbolKind kind,
                                 HdkgContour contour,
                                 double eps,
                                 double p_squared,
                                 struct HdkgComplex *out);

// Writes the real mass-shell pole position q_N / a^2 of the truncated
// symbol. Fails with InvalidArgument at even orders.
//
// # Safety
// `out` must be a valid double pointer.
HdkgStatus hdkg_pole_location(uint32_t order, double a, double *out);

// Builds the single-mode dynamics handle at spatial wavenumber `k`.
// Release with `hdkg_mode_ode_free`.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
HdkgStatus hdkg_mode_ode_new(uint32_t order, double a, double k, struct HdkgModeOde **out);

// Releases a mode handle; accepts null.
//
// # Safety
// `ode` must come from `hdkg_mode_ode_new` and not have been freed
// already.
void hdkg_mode_ode_free(struct HdkgModeOde *ode);

// First-order system dimension (twice the derivative order); 0 for a null
// handle.
//
// # Safety
// `ode` must be a live mode handle or null.
size_t hdkg_mode_ode_dim(const struct HdkgModeOde *ode);

// Copies the characteristic roots into `buf`; the count equals the system
// dimension.
//
// # Safety
// `ode` must be a live mode handle or null; `buf` must point to `cap`
// writable complex slots.
HdkgStatus hdkg_mode_ode_char_roots(const struct HdkgModeOde *ode,
                                    struct HdkgComplex *buf,
                                    size_t cap);

// Writes the root census of the characteristic spectrum.
//
// # Safety
// `ode` must be a live mode handle or null; the three count pointers must
// be valid.
HdkgStatus hdkg_mode_ode_classify(const struct HdkgModeOde *ode,
                                  size_t *oscillatory_pairs,
                                  size_t *growing,
                                  size_t *decaying);

// Integrates the mode from the given initial state with fixed-step RK4.
// `initial_len` must equal the system dimension. Release the trajectory
// with `hdkg_trajectory_free`.
//
// # Safety
// `ode` must be a live mode handle or null; `initial` must point to
// `initial_len` doubles; `out` must be a valid pointer to a handle slot.
HdkgStatus hdkg_mode_ode_integrate(const struct HdkgModeOde *ode,
                                   const double *initial,
                                   size_t initial_len,
                                   double t_end,
                                   double dt,
                                   struct HdkgTrajectory **out);

// Releases a trajectory handle; accepts null.
//
// # Safety
// `traj` must come from `hdkg_mode_ode_integrate` and not have been
// freed already.
void hdkg_trajectory_free(struct HdkgTrajectory *traj);

// Number of stored time steps including the initial state; 0 for a null
// handle.
//
// # Safety
// `traj` must be a live trajectory handle or null.
size_t hdkg_trajectory_step_count(const struct HdkgTrajectory *traj);

// State vector length per step; 0 for a null handle.
//
// # Safety
// `traj` must be a live trajectory handle or null.
size_t hdkg_trajectory_dim(const struct HdkgTrajectory *traj);

// 1 when the integration stopped early at the blow-up guard, else 0.
//
// # Safety
// `traj` must be a live trajectory handle or null.
int32_t hdkg_trajectory_blew_up(const struct HdkgTrajectory *traj);

// Copies the step times into `buf`.
//
// # Safety
// `traj` must be a live trajectory handle or null; `buf` must point to
// `cap` writable doubles.
HdkgStatus hdkg_trajectory_times(const struct HdkgTrajectory *traj, double *buf, size_t cap);

// Copies the state vector at `step` into `buf`.
//
// # Safety
// `traj` must be a live trajectory handle or null; `buf` must point to
// `cap` writable doubles.
HdkgStatus hdkg_trajectory_state(const struct HdkgTrajectory *traj,
                                 size_t step,
                                 double *buf,
                                 size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HDKG_H */
