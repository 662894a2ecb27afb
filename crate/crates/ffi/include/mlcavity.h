#ifndef MLCAVITY_H
#define MLCAVITY_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MlcStatus {
  MLC_STATUS_OK = 0,
  MLC_STATUS_INVALID_ARGUMENT = 1,
  MLC_STATUS_UNSUPPORTED = 2,
  MLC_STATUS_DOMAIN = 3,
  MLC_STATUS_DEGENERATE = 4,
  MLC_STATUS_STIFFNESS = 5,
  MLC_STATUS_CONFIG = 6,
  MLC_STATUS_IO = 7,
  MLC_STATUS_NULL_POINTER = 8,
  MLC_STATUS_PANIC = 9,
} MlcStatus;

typedef enum MlcGeometry {
  MLC_GEOMETRY_PI = 0,
  MLC_GEOMETRY_SIGMA_PLUS = 1,
  MLC_GEOMETRY_SIGMA_MINUS = 2,
} MlcGeometry;

typedef enum MlcRegime {
  MLC_REGIME_EXPONENTIAL = 0,
  MLC_REGIME_ACCELERATED = 1,
  MLC_REGIME_DECELERATED = 2,
} MlcRegime;

/**
 * Opaque coupling set of one F → F′ transition.
 */
typedef struct MlcCouplingSet MlcCouplingSet;

/**
 * Opaque result of a mean-field integration.
 */
typedef struct MlcTimeSeries MlcTimeSeries;

/**
 * Drive of the cavity mode.
 */
typedef struct MlcDrive {
  double eta;
  double delta_a;
  double delta_c;
  double kappa;
} MlcDrive;

/**
 * Parameters of the two-transition rate model.
 */
typedef struct MlcRateParams {
  double c_minus_sq;
  double c_plus_sq;
  double g0;
  double gamma;
  double kappa;
  double n_atoms;
  double delta_a;
  double delta_c;
  double eta;
} MlcRateParams;

typedef struct MlcRateCoefficients {
  double u;
  double w;
  double alpha;
  double beta;
  double gamma_eff;
} MlcRateCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *mlc_last_error(void);

/**
 * ⟨j1 m1; j2 m2 | j m⟩ with every argument given as twice its value.
 *
 * # Safety
 * `result` must be a valid pointer to a double.
 */
enum MlcStatus mlc_clebsch_gordan(int32_t two_j1,
                                  int32_t two_m1,
                                  int32_t two_j2,
                                  int32_t two_m2,
                                  int32_t two_j,
                                  int32_t two_m,
                                  double *result);

/**
 * Builds the couplings of a closed F → F′ transition.
 *
 * # Safety
 * `handle` must be a valid pointer; on success it receives a handle to be
 * released with [`mlc_coupling_set_free`].
 */
enum MlcStatus mlc_coupling_set_new(int32_t two_f_ground,
                                    int32_t two_f_excited,
                                    enum MlcGeometry geometry,
                                    double g0,
                                    double gamma,
                                    struct MlcCouplingSet **handle);

/**
 * # Safety
 * `handle` must come from [`mlc_coupling_set_new`] and not be used again.
 */
void mlc_coupling_set_free(struct MlcCouplingSet *handle);

/**
 * Number of ground sublevels, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live coupling-set handle.
 */
size_t mlc_coupling_set_len(const struct MlcCouplingSet *handle);

/**
 * Copies the Clebsch–Gordan coefficients, in increasing ground m, into
 * `buffer` of length `len` (at least [`mlc_coupling_set_len`]).
 *
 * # Safety
 * `buffer` must hold `len` doubles.
 */
enum MlcStatus mlc_coupling_set_cg(const struct MlcCouplingSet *handle, double *buffer, size_t len);

/**
 * g_eff = g0 √(Σ c_m² P_m) for normalized populations in increasing m.
 *
 * # Safety
 * `populations` must hold `len` doubles; `result` must be valid.
 */
enum MlcStatus mlc_effective_coupling(const struct MlcCouplingSet *handle,
                                      const double *populations,
                                      size_t len,
                                      double *result);

/**
 * Steady-state intracavity photon number of the weakly driven system.
 *
 * # Safety
 * `drive` and `result` must be valid pointers.
 */
enum MlcStatus mlc_intracavity_intensity(const struct MlcDrive *drive,
                                         double gamma,
                                         double n_atoms,
                                         double g_eff,
                                         double *result);

/**
 * 2 g_eff √N.
 */
double mlc_normal_mode_splitting(double g_eff, double n_atoms);

/**
 * # Safety
 * `params` and `result` must be valid pointers.
 */
enum MlcStatus mlc_rate_coefficients(const struct MlcRateParams *params,
                                     struct MlcRateCoefficients *result);

/**
 * Time at which P_− has fallen from 1 to `p`.
 *
 * # Safety
 * `coeffs` and `result` must be valid pointers.
 */
enum MlcStatus mlc_implicit_time(const struct MlcRateCoefficients *coeffs,
                                 double p,
                                 double *result);

/**
 * # Safety
 * `coeffs` and `result` must be valid pointers.
 */
enum MlcStatus mlc_classify_regime(const struct MlcRateCoefficients *coeffs,
                                   enum MlcRegime *result);

/**
 * Integrates the mean-field equations at constant atom number from an empty
 * cavity, sampling `samples` evenly spaced times on [0, t_end].
 * `populations` holds the initial ground populations in increasing m.
 *
 * # Safety
 * Pointers must be valid; `populations` must hold `len` doubles. On success
 * `series` receives a handle to be released with [`mlc_time_series_free`].
 */
enum MlcStatus mlc_meanfield_integrate(const struct MlcCouplingSet *handle,
                                       const double *populations,
                                       size_t len,
                                       const struct MlcDrive *drive,
                                       double n_atoms,
                                       double t_end,
                                       size_t samples,
                                       struct MlcTimeSeries **series);

/**
 * # Safety
 * `series` must come from [`mlc_meanfield_integrate`] and not be used again.
 */
void mlc_time_series_free(struct MlcTimeSeries *series);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t mlc_time_series_len(const struct MlcTimeSeries *series);

/**
 * Copies sample times and intracavity photon numbers into buffers of length
 * `len` (at least [`mlc_time_series_len`]). Either buffer may be null.
 *
 * # Safety
 * Non-null buffers must hold `len` doubles.
 */
enum MlcStatus mlc_time_series_photon_number(const struct MlcTimeSeries *series,
                                             double *times,
                                             double *photon_number,
                                             size_t len);

/**
 * Peak excited-state population reached during the run.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
double mlc_time_series_peak_rho_ee(const struct MlcTimeSeries *series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MLCAVITY_H */
