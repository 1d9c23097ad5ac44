/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SEMIQ_H
#define SEMIQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SemiqMethod {
  SEMIQ_METHOD_RK45 = 0,
  SEMIQ_METHOD_RK4 = 1,
} SemiqMethod;

typedef enum SemiqRepresentation {
  SEMIQ_REPRESENTATION_MULTIPLIERS = 0,
  SEMIQ_REPRESENTATION_QUANTUM = 1,
  SEMIQ_REPRESENTATION_CLASSICAL = 2,
} SemiqRepresentation;

typedef enum SemiqStatus {
  SEMIQ_STATUS_OK = 0,
  SEMIQ_STATUS_NULL_POINTER = 1,
  SEMIQ_STATUS_VALIDATION = 2,
  SEMIQ_STATUS_DOMAIN = 3,
  SEMIQ_STATUS_PURE_LIMIT = 4,
  SEMIQ_STATUS_DELTA_LIMIT = 5,
  SEMIQ_STATUS_UNREACHABLE = 6,
  SEMIQ_STATUS_DRIFT_EXCEEDED = 7,
  SEMIQ_STATUS_STEP_UNDERFLOW = 8,
  SEMIQ_STATUS_NON_FINITE = 9,
  SEMIQ_STATUS_NON_CONVERGED = 10,
  SEMIQ_STATUS_NO_CROSSINGS = 11,
  SEMIQ_STATUS_INCONSISTENT_SIGNS = 12,
  SEMIQ_STATUS_OUT_OF_RANGE = 13,
  SEMIQ_STATUS_PANIC = 14,
} SemiqStatus;

/**
 * Validated model parameters.
 */
typedef struct SemiqModel SemiqModel;

/**
 * Sampled trajectory together with the parameters that produced it.
 */
typedef struct SemiqTrajectory SemiqTrajectory;

typedef struct SemiqParams {
  double m_q;
  double m_cl;
  double omega_q;
  double e;
  double hbar;
} SemiqParams;

typedef struct SemiqIntegrator {
  enum SemiqMethod method;
  double rel_tol;
  double abs_tol;
  double dt_init;
  double t_end;
  size_t sample_stride;
  double drift_tol;
} SemiqIntegrator;

typedef struct SemiqLyapunovParams {
  double renorm_dt;
  double horizon;
  double d0;
  uint64_t seed;
} SemiqLyapunovParams;

typedef struct SemiqMultipliers {
  double lambda1;
  double lambda2;
  double lambda3;
  double a;
  double p_a;
} SemiqMultipliers;

typedef struct SemiqExpectations {
  double x2;
  double p2;
  double l;
  double a;
  double p_a;
} SemiqExpectations;

typedef struct SemiqInvariants {
  double i_uncert;
  double i_lambda;
  double energy;
  double e_r;
  double t_val;
  double lambda0;
  double entropy;
} SemiqInvariants;

/**
 * Maximal relative drift of the invariants over a run.
 */
typedef struct SemiqDrift {
  double i_lambda;
  double i_uncert;
  double energy;
} SemiqDrift;

typedef struct SemiqLyapunov {
  double lambda_max;
  double uncertainty;
  double positive_fraction;
  struct SemiqDrift drift;
} SemiqLyapunov;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *semiq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *semiq_version(void);

struct SemiqParams semiq_params_default(void);

struct SemiqIntegrator semiq_integrator_default(void);

struct SemiqLyapunovParams semiq_lyapunov_default(void);

/**
 * Validates `params` and stores a new model handle in `*out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_model_new(struct SemiqParams params, struct SemiqModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`semiq_model_new`] not yet freed.
 */
void semiq_model_free(struct SemiqModel *model);

/**
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_multipliers_to_evs(const struct SemiqModel *model,
                                          const struct SemiqMultipliers *s,
                                          struct SemiqExpectations *out);

/**
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_evs_to_multipliers(const struct SemiqModel *model,
                                          const struct SemiqExpectations *e,
                                          struct SemiqMultipliers *out);

/**
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_invariants_of_multipliers(const struct SemiqModel *model,
                                                 const struct SemiqMultipliers *s,
                                                 struct SemiqInvariants *out);

/**
 * `classical` selects the classical statistics (`I ≥ 0`) instead of the quantum one.
 *
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_invariants_of_expectations(const struct SemiqModel *model,
                                                  const struct SemiqExpectations *e,
                                                  bool classical,
                                                  struct SemiqInvariants *out);

/**
 * `T(I_λ) = (ħ/2)·coth(ħI_λ)`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_t_of_ilambda(double i_lambda, double hbar, double *out);

/**
 * Inverse of `I = T(I_λ)²`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_ilambda_from_i(double i, double hbar, double *out);

/**
 * Integrates from expectation values in representation `rep`.
 *
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_integrate_expectations(const struct SemiqModel *model,
                                              const struct SemiqExpectations *initial,
                                              enum SemiqRepresentation rep,
                                              const struct SemiqIntegrator *cfg,
                                              struct SemiqTrajectory **out);

/**
 * Integrates from Lagrange multipliers in representation `rep`.
 *
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_integrate_multipliers(const struct SemiqModel *model,
                                             const struct SemiqMultipliers *initial,
                                             enum SemiqRepresentation rep,
                                             const struct SemiqIntegrator *cfg,
                                             struct SemiqTrajectory **out);

/**
 * Number of stored samples; 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t semiq_trajectory_len(const struct SemiqTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_trajectory_time(const struct SemiqTrajectory *traj,
                                       size_t index,
                                       double *out);

/**
 * Sample `index` as expectation values, whatever the representation.
 *
 * # Safety
 * `traj` must be a live handle; `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_trajectory_expectations(const struct SemiqTrajectory *traj,
                                               size_t index,
                                               struct SemiqExpectations *out);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_trajectory_invariants(const struct SemiqTrajectory *traj,
                                             size_t index,
                                             struct SemiqInvariants *out);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be null or valid for writes.
 */
enum SemiqStatus semiq_trajectory_drift(const struct SemiqTrajectory *traj, struct SemiqDrift *out);

/**
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void semiq_trajectory_free(struct SemiqTrajectory *traj);

/**
 * Maximal Lyapunov exponent of the trajectory starting at `initial`.
 *
 * # Safety
 * Pointers must be null or valid; `model` must be a live handle.
 */
enum SemiqStatus semiq_lyapunov(const struct SemiqModel *model,
                                const struct SemiqExpectations *initial,
                                enum SemiqRepresentation rep,
                                const struct SemiqIntegrator *cfg,
                                const struct SemiqLyapunovParams *params,
                                struct SemiqLyapunov *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIQ_H */
