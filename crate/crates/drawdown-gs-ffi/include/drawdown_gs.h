#ifndef DRAWDOWN_GS_H
#define DRAWDOWN_GS_H

/* Generated by cbindgen from drawdown-gs-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  DGS_STATUS_OK = 0,
  DGS_STATUS_NULL_POINTER = 1,
  DGS_STATUS_INVALID_PARAMETER = 2,
  DGS_STATUS_DOMAIN = 3,
  DGS_STATUS_NUMERICAL = 4,
  DGS_STATUS_NON_CONVERGENCE = 5,
  DGS_STATUS_INTERNAL = 6,
} DgsStatus;

/**
 * A drawdown boundary with optional minimum capital (opaque).
 */
typedef struct DgsDrawdown DgsDrawdown;

/**
 * A Lévy surplus model (opaque).
 */
typedef struct DgsModel DgsModel;

/**
 * A cached scale-function set for one (model, q) pair (opaque).
 */
typedef struct DgsScaleSet DgsScaleSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Human-readable description of a status code (static storage).
 */
const char *dgs_status_message(DgsStatus status);

/**
 * Library version string (static storage).
 */
const char *dgs_version(void);

/**
 * Compound Poisson surplus with exponential claims.
 */
DgsStatus dgs_model_cramer_lundberg(double c, double lambda0, double mu_claim, DgsModel **out);

/**
 * Brownian motion with drift.
 */
DgsStatus dgs_model_brownian(double mu, double sigma, DgsModel **out);

/**
 * Jump diffusion with Erlang(2) claims.
 */
DgsStatus dgs_model_jump_diffusion(double c,
                                   double sigma,
                                   double lambda0,
                                   double alpha,
                                   DgsModel **out);

/**
 * Releases a model handle (no-op on NULL).
 */
void dgs_model_free(DgsModel *model);

/**
 * Laplace exponent `psi(theta)` of the model.
 */
DgsStatus dgs_laplace_exponent(const DgsModel *model, double theta, double *out);

/**
 * Largest solution of `psi(theta) = q`.
 */
DgsStatus dgs_phi_q(const DgsModel *model, double q, double *out);

/**
 * Lévy measure density at jump size `z > 0`.
 */
DgsStatus dgs_levy_density(const DgsModel *model, double z, double *out);

/**
 * Lévy measure tail beyond `z`.
 */
DgsStatus dgs_levy_tail(const DgsModel *model, double z, double *out);

/**
 * The zero boundary (classical ruin).
 */
DgsStatus dgs_drawdown_ruin(DgsDrawdown **out);

/**
 * Linear boundary `a z - b` with `a < 1`, `b >= 0`.
 */
DgsStatus dgs_drawdown_linear(double a, double b, DgsDrawdown **out);

/**
 * Tax boundary with a constant rate in `[0, 1)` anchored at `x0 > 0`.
 */
DgsStatus dgs_drawdown_tax_constant(double gamma, double x0, DgsDrawdown **out);

/**
 * Dividend-barrier boundary `(z - b) ∨ 0`.
 */
DgsStatus dgs_drawdown_barrier(double b, DgsDrawdown **out);

/**
 * Copies `dd` with a constant minimum-capital requirement attached.
 */
DgsStatus dgs_drawdown_with_min_capital(const DgsDrawdown *dd, double v, DgsDrawdown **out);

/**
 * Releases a drawdown handle (no-op on NULL).
 */
void dgs_drawdown_free(DgsDrawdown *dd);

/**
 * Builds the cached scale-function set for `(model, q)`, `q >= 0`.
 */
DgsStatus dgs_scale_set_new(const DgsModel *model, double q, DgsScaleSet **out);

/**
 * Releases a scale-set handle (no-op on NULL).
 */
void dgs_scale_set_free(DgsScaleSet *set);

/**
 * Scale function value `W_q(x)` (zero for `x < 0`).
 */
DgsStatus dgs_scale_w(const DgsScaleSet *set, double x, double *out);

/**
 * First derivative `W_q'(x)`.
 */
DgsStatus dgs_scale_w1(const DgsScaleSet *set, double x, double *out);

/**
 * Second derivative `W_q''(x)`.
 */
DgsStatus dgs_scale_w2(const DgsScaleSet *set, double x, double *out);

/**
 * Dominant exponent of the set (the largest root of `psi = q`).
 */
DgsStatus dgs_scale_phi_q(const DgsScaleSet *set, double *out);

/**
 * Survival factor for reaching `s` from `x` before the drawdown.
 */
DgsStatus dgs_exit_prob_drawdown(const DgsModel *model,
                                 const DgsDrawdown *dd,
                                 double q,
                                 double x,
                                 double s,
                                 double *out);

/**
 * Probability of drawdown in finite time from `x`. Pass `rel_tol <= 0`
 * for the default tolerance.
 */
DgsStatus dgs_drawdown_probability(const DgsModel *model,
                                   const DgsDrawdown *dd,
                                   double x,
                                   double rel_tol,
                                   double *out);

/**
 * Joint transform of (last-maximum time, drawdown time) at rates
 * `(q, lambda)`. Pass `rel_tol <= 0` for the default tolerance.
 */
DgsStatus dgs_joint_laplace(const DgsModel *model,
                            const DgsDrawdown *dd,
                            double q,
                            double lambda,
                            double x,
                            double rel_tol,
                            double *out);

/**
 * Joint density of (drawdown time `t1`, last-maximum time `t2`) by
 * numerical inversion. Pass `n_terms == 0` for the default term count.
 */
DgsStatus dgs_joint_density(const DgsModel *model,
                            const DgsDrawdown *dd,
                            double x,
                            double t1,
                            double t2,
                            unsigned long long n_terms,
                            double *out);

/**
 * Monte Carlo estimate of the drawdown probability: mean and standard
 * error at `n_paths` paths under the given seed.
 */
DgsStatus dgs_mc_drawdown_probability(const DgsModel *model,
                                      const DgsDrawdown *dd,
                                      double x,
                                      unsigned long long n_paths,
                                      unsigned long long seed,
                                      double *out_mean,
                                      double *out_stderr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRAWDOWN_GS_H */
