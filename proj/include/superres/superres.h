// Copyright 2026 The superres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef SUPERRES_SUPERRES_H_
#define SUPERRES_SUPERRES_H_

/*
 * C interface to the two-source superresolution library.
 *
 * Every function returns an sr_status. On failure a description is available
 * from sr_last_error_message() on the calling thread until the next call.
 * Matrices cross the boundary as row-major arrays of doubles. Handles are
 * opaque; destroy functions accept NULL.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SR_API __declspec(dllexport)
#elif defined(__GNUC__)
#define SR_API __attribute__((visibility("default")))
#else
#define SR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sr_status {
  SR_OK = 0,
  SR_INVALID_ARGUMENT = 1,
  SR_DOMAIN_ERROR = 2,
  SR_SINGULAR_BASIS = 3,
  SR_SHAPE_ERROR = 4,
  SR_NO_SOLUTION = 5,
  SR_GAUGE_INVALID = 6,
  SR_NOT_COMMUTING = 7,
  SR_DEGENERACY_UNRESOLVED = 8,
  SR_ALIGNMENT_OUT_OF_RANGE = 9,
  SR_QUADRATURE_ERROR = 10,
  SR_FIM_EXCEEDS_QFI = 11,
  SR_DEGENERATE = 12,
  SR_IO_ERROR = 13,
  SR_BUFFER_TOO_SMALL = 14,
  SR_INTERNAL_ERROR = 99
} sr_status;

typedef struct sr_psf sr_psf;
typedef struct sr_model sr_model;
typedef struct sr_measurement sr_measurement;

SR_API const char* sr_version(void);
SR_API const char* sr_status_name(sr_status status);
SR_API const char* sr_last_error_message(void);

/* ---- PSF ---------------------------------------------------------------- */

SR_API sr_status sr_psf_create_gaussian(double sigma, sr_psf** out);
/* Uniform, increasing grid; L2-normalized and even samples. */
SR_API sr_status sr_psf_create_tabulated(const double* x, const double* values,
                                         size_t n, sr_psf** out);
/* Two-column text file (x, amplitude); '#' starts a comment. */
SR_API sr_status sr_psf_load(const char* path, sr_psf** out);
SR_API void sr_psf_destroy(sr_psf* psf);
SR_API sr_status sr_psf_width(const sr_psf* psf, double* out);
SR_API sr_status sr_psf_value(const sr_psf* psf, double x, double* out);
SR_API sr_status sr_psf_is_gaussian(const sr_psf* psf, int* out);

/* ---- Overlaps ----------------------------------------------------------- */

typedef struct sr_overlaps {
  double delta;
  double kappa;
  double gamma;
  double beta;
  double eta3;
  double eta4;
} sr_overlaps;

typedef enum sr_quadrature_rule {
  SR_QUADRATURE_TRAPEZOID = 0,
  SR_QUADRATURE_GAUSS_LEGENDRE = 1
} sr_quadrature_rule;

SR_API sr_status sr_overlaps_compute(const sr_psf* psf, double theta2,
                                     sr_overlaps* out);
/* half_range in PSF widths; node_count odd and >= 3. */
SR_API sr_status sr_overlaps_quadrature(const sr_psf* psf, double theta2,
                                        double half_range, int node_count,
                                        sr_quadrature_rule rule,
                                        sr_overlaps* out);

/* ---- Quantum model ------------------------------------------------------ */

typedef enum sr_matrix_kind {
  SR_MATRIX_RHO = 0,
  SR_MATRIX_L1 = 1,
  SR_MATRIX_L2 = 2,
  SR_MATRIX_DRHO1 = 3,
  SR_MATRIX_DRHO2 = 4
} sr_matrix_kind;

typedef struct sr_qfi {
  double qfi[4];
  double c;
  double c_closed_form;
  double c_discrepancy;
} sr_qfi;

SR_API sr_status sr_model_create(const sr_psf* psf, double theta1,
                                 double theta2, sr_model** out);
SR_API void sr_model_destroy(sr_model* model);
SR_API sr_status sr_model_overlaps(const sr_model* model, sr_overlaps* out);
SR_API sr_status sr_model_matrix(const sr_model* model, sr_matrix_kind which,
                                 double out[16]);
SR_API sr_status sr_model_qfi(const sr_model* model, sr_qfi* out);

/* ---- Gauge -------------------------------------------------------------- */

typedef enum sr_gauge_solver {
  SR_GAUGE_CLOSED_FORM = 0,
  SR_GAUGE_LEAST_NORM = 1
} sr_gauge_solver;

typedef struct sr_gauge {
  /* Pauli coefficients (I, X, Y, Z) of the kernel blocks. */
  double k1_pauli[4];
  double k2_pauli[4];
  double c0_residual;
  double c1_residual;
  double c2_residual;
  double c1_components[4];
  double c2_components[3];
  double commutator_norm;
  int iterations;
  /* (lambda1_j, lambda2_j) for j = 1..4. */
  double eigenvalues[8];
  /* Row-major; column j holds phi_j in e-basis components. */
  double basis[16];
} sr_gauge;

/*
 * Solves for a commuting SLD pair. On SR_NO_SOLUTION or SR_GAUGE_INVALID,
 * c0_residual is still filled in and every other field is zero.
 */
SR_API sr_status sr_model_gauge(const sr_model* model, sr_gauge_solver solver,
                                sr_gauge* out);
/*
 * Writes the JSON diagnostics dump. *needed receives the size including the
 * terminating NUL; SR_BUFFER_TOO_SMALL if capacity is insufficient.
 */
SR_API sr_status sr_model_gauge_json(const sr_model* model, char* buffer,
                                     size_t capacity, size_t* needed);

/* ---- Measurements ------------------------------------------------------- */

typedef struct sr_regrets {
  double fim[4];
  double qfi[4];
  double delta1;
  double delta2;
  double c;
  double irtr_slack;
  double order_margin;
} sr_regrets;

/* pixel_width or half_range <= 0 selects the default for this PSF. */
SR_API sr_status sr_measurement_direct(const sr_psf* psf, double pixel_width,
                                       double half_range, sr_measurement** out);
SR_API sr_status sr_measurement_spade(const sr_psf* psf, double alignment,
                                      int q_max, sr_measurement** out);
SR_API sr_status sr_measurement_joint(const sr_model* model,
                                      sr_gauge_solver solver,
                                      sr_measurement** out);
/* Eigenbasis of the canonical SLD for parameter j (1 or 2). */
SR_API sr_status sr_measurement_sld(const sr_model* model, int j,
                                    sr_measurement** out);
/* Row-major orthonormal basis of the e-space. */
SR_API sr_status sr_measurement_projective(const sr_psf* psf,
                                           const double basis[16],
                                           sr_measurement** out);
SR_API void sr_measurement_destroy(sr_measurement* m);
SR_API sr_status sr_measurement_outcome_count(const sr_measurement* m,
                                              size_t* out);
/* Each output array holds outcome_count entries; dp1 and dp2 may be NULL. */
SR_API sr_status sr_measurement_distribution(const sr_measurement* m,
                                             const sr_model* model,
                                             double* probs, double* dp1,
                                             double* dp2, size_t capacity);
SR_API sr_status sr_measurement_regrets(const sr_measurement* m,
                                        const sr_model* model, sr_regrets* out);

/* ---- Simulation --------------------------------------------------------- */

typedef struct sr_trial_config {
  uint64_t photons;
  uint32_t trials;
  uint64_t seed;
  double theta1_lo;
  double theta1_hi;
  double theta2_lo;
  double theta2_hi;
  /* 0 selects the hardware concurrency. */
  unsigned threads;
} sr_trial_config;

typedef struct sr_trial_summary {
  double mean[2];
  double cov[4];
  double crb[4];
  double ratio[2];
  double boundary_fraction;
  int boundary_warning;
} sr_trial_summary;

/* Defaults with the search box centred on the model's scene. */
SR_API sr_status sr_trial_config_default(const sr_model* model,
                                         sr_trial_config* out);
SR_API sr_status sr_sample_outcomes(const sr_measurement* m,
                                    const sr_model* model, uint64_t photons,
                                    uint64_t seed, uint64_t* counts,
                                    size_t capacity);
/* estimates may be NULL; otherwise it receives 2 * trials values. */
SR_API sr_status sr_simulate(const sr_measurement* m, const sr_model* model,
                             const sr_trial_config* config,
                             sr_trial_summary* out, double* estimates);

#ifdef __cplusplus
}
#endif

#endif  /* SUPERRES_SUPERRES_H_ */
