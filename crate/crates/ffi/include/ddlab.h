#ifndef DDLAB_H
#define DDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DdlabClassification {
  DDLAB_CLASSIFICATION_REACHES_ZERO = 0,
  DDLAB_CLASSIFICATION_NEGATIVE_MAX = 1,
  DDLAB_CLASSIFICATION_UNDETERMINED = 2,
} DdlabClassification;

typedef enum DdlabStatus {
  DDLAB_STATUS_OK = 0,
  DDLAB_STATUS_NULL_POINTER = 1,
  DDLAB_STATUS_INVALID_ARGUMENT = 2,
  DDLAB_STATUS_NO_CONVERGENCE = 3,
  DDLAB_STATUS_BRACKET_INVALID = 4,
  DDLAB_STATUS_NOT_CRITICAL = 5,
  DDLAB_STATUS_SUPPORT_OVERFLOW = 6,
  DDLAB_STATUS_BUFFER_TOO_SMALL = 7,
  DDLAB_STATUS_PANIC = 8,
  DDLAB_STATUS_FAILURE = 9,
} DdlabStatus;

/**
 * Critical profile and its bisection record.
 */
typedef struct DdlabProfile DdlabProfile;

/**
 * Time stepper for the regularized equation.
 */
typedef struct DdlabSimulation DdlabSimulation;

/**
 * Outcome of one shot; absent event times are NaN.
 */
typedef struct DdlabShot {
  enum DdlabClassification classification;
  double tau1;
  double tau2;
  double terminal_a;
  double terminal_ap;
  bool step_underflow;
} DdlabShot;

/**
 * Settings for `ddlab_sim_new`; a NaN `delta` selects `.1λ⁴`.
 */
typedef struct DdlabSimConfig {
  double lambda;
  double delta;
  size_t n_modes;
  double dt;
  double solver_tol;
  size_t max_iters;
  bool dealias;
  bool rescaled;
  bool allow_delta_zero;
} DdlabSimConfig;

typedef struct DdlabNorms {
  double l2;
  double h1dot;
  double h2dot;
  double mass;
} DdlabNorms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in bytes
 * excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ddlab_last_error_message(char *buf, size_t len);

/**
 * Integrates the profile equation from `A″(0) = mu` with default settings.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `DdlabShot`.
 */
enum DdlabStatus ddlab_shoot(double mu, struct DdlabShot *out);

/**
 * Bisects for `μ*` on `[lo, hi]` to width `tol` and assembles the critical
 * profile. Release the handle with `ddlab_profile_free`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum DdlabStatus ddlab_profile_solve(double lo, double hi, double tol, struct DdlabProfile **out);

/**
 * # Safety
 * `p` must be null or a handle from `ddlab_profile_solve` not yet freed.
 */
void ddlab_profile_free(struct DdlabProfile *p);

/**
 * Bisection midpoint, final bracket, and support endpoint `τ*`.
 *
 * # Safety
 * `p` must be a live handle; out-pointers must be null or writable.
 */
enum DdlabStatus ddlab_profile_summary(const struct DdlabProfile *p,
                                       double *mu_star,
                                       double *bracket_lo,
                                       double *bracket_hi,
                                       double *tau_star);

/**
 * `L²` norms of the odd-extended profile and its first two derivatives.
 *
 * # Safety
 * `p` must be a live handle; out-pointers must be null or writable.
 */
enum DdlabStatus ddlab_profile_norms(const struct DdlabProfile *p,
                                     double *norm_a,
                                     double *norm_ap,
                                     double *norm_app);

/**
 * Number of samples on `[−τ*, τ*]`.
 *
 * # Safety
 * `p` must be a live handle and `len` writable.
 */
enum DdlabStatus ddlab_profile_len(const struct DdlabProfile *p, size_t *len);

/**
 * Copies the sample abscissae and profile values.
 *
 * # Safety
 * `tau` and `a` must be valid for `len` doubles each.
 */
enum DdlabStatus ddlab_profile_samples(const struct DdlabProfile *p,
                                       double *tau,
                                       double *a,
                                       size_t len);

/**
 * Profile value at `tau` by linear interpolation, zero off the support.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum DdlabStatus ddlab_profile_eval(const struct DdlabProfile *p, double tau, double *out);

/**
 * Fills `out` with the defaults for `lambda`: `δ = .1λ⁴`, 8192 modes,
 * `dt = 1e-3`, tolerance `1e-8`.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum DdlabStatus ddlab_sim_config_default(double lambda, struct DdlabSimConfig *out);

/**
 * Creates a simulation at `t = 0` from Gaussian data. Release with
 * `ddlab_sim_free`.
 *
 * # Safety
 * `cfg` must be null or readable; `out` null or valid for one pointer.
 */
enum DdlabStatus ddlab_sim_new(const struct DdlabSimConfig *cfg, struct DdlabSimulation **out);

/**
 * # Safety
 * `s` must be null or a handle from `ddlab_sim_new` not yet freed.
 */
void ddlab_sim_free(struct DdlabSimulation *s);

/**
 * Advances `n_steps` Crank–Nicolson steps. On failure the state is left at
 * the last successful step.
 *
 * # Safety
 * `s` must be a live handle.
 */
enum DdlabStatus ddlab_sim_step(struct DdlabSimulation *s, size_t n_steps);

/**
 * # Safety
 * `s` must be a live handle and `t` writable.
 */
enum DdlabStatus ddlab_sim_time(const struct DdlabSimulation *s, double *t);

/**
 * Norms and mass of the current state in physical variables.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum DdlabStatus ddlab_sim_norms(const struct DdlabSimulation *s, struct DdlabNorms *out);

/**
 * `∫u dx` of the current state.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum DdlabStatus ddlab_sim_mass(const struct DdlabSimulation *s, double *out);

/**
 * Number of grid points.
 *
 * # Safety
 * `s` must be a live handle and `len` writable.
 */
enum DdlabStatus ddlab_sim_len(const struct DdlabSimulation *s, size_t *len);

/**
 * Copies grid points and field values `u(x, t)`.
 *
 * # Safety
 * `x` and `u` must be valid for `len` doubles each.
 */
enum DdlabStatus ddlab_sim_values(const struct DdlabSimulation *s,
                                  double *x,
                                  double *u,
                                  size_t len);

/**
 * `fine + (fine − coarse)/(ratio^order − 1)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum DdlabStatus ddlab_richardson(double coarse,
                                  double fine,
                                  uint32_t order,
                                  double ratio,
                                  double *out);

/**
 * `H²` norm of the scaled self-similar solution at time `t < big_t`,
 * given the profile norms.
 *
 * # Safety
 * `out` must be writable.
 */
enum DdlabStatus ddlab_selfsim_h2_norm(double lambda,
                                       double big_t,
                                       double t,
                                       double norm_a,
                                       double norm_ap,
                                       double norm_app,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DDLAB_H */
