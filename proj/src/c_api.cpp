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
#include "superres/superres.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <utility>

#include "superres/errors.hpp"
#include "superres/measurements.hpp"
#include "superres/montecarlo.hpp"
#include "superres/psf.hpp"
#include "superres/sld_algebra.hpp"
#include "superres/state_model.hpp"

struct sr_psf {
  superres::PsfSpec spec;
};

struct sr_model {
  superres::PsfSpec psf;
  superres::QuantumModel model;
};

struct sr_measurement {
  superres::PovmSpec povm;
};

namespace {

thread_local std::string g_last_error;

sr_status fail(sr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs f, translating library exceptions into status codes.
template <class F>
sr_status guarded(F&& f) noexcept {
  try {
    g_last_error.clear();
    f();
    return SR_OK;
  } catch (const superres::Error& e) {
    return fail(static_cast<sr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SR_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(SR_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(SR_INTERNAL_ERROR, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw superres::InvalidArgument(what);
}

template <class M>
void store(const M& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

void store_overlaps(const superres::OverlapSet& ov, sr_overlaps* out) {
  *out = {ov.delta, ov.kappa, ov.gamma, ov.beta, ov.eta3, ov.eta4};
}

superres::GaugeSource to_source(sr_gauge_solver s) {
  switch (s) {
    case SR_GAUGE_CLOSED_FORM: return superres::GaugeSource::kClosedForm;
    case SR_GAUGE_LEAST_NORM: return superres::GaugeSource::kLeastNorm;
  }
  throw superres::InvalidArgument("unknown gauge solver");
}

superres::GaugePair solve(const superres::QuantumModel& m, superres::GaugeSource s) {
  if (s == superres::GaugeSource::kClosedForm) return superres::closed_form_gauge(m.overlaps);
  return superres::solve_gauge_least_norm(superres::decompose_blocks(m.l1),
                                          superres::decompose_blocks(m.l2));
}

sr_status make_measurement(superres::PovmSpec povm, sr_measurement** out) {
  *out = new sr_measurement{std::move(povm)};
  return SR_OK;
}

}  // namespace

extern "C" {

const char* sr_version(void) { return "1.0.0"; }

const char* sr_status_name(sr_status status) {
  switch (status) {
    case SR_OK: return "OK";
    case SR_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case SR_INTERNAL_ERROR: return "InternalError";
    default: break;
  }
  if (status >= SR_INVALID_ARGUMENT && status <= SR_IO_ERROR)
    return superres::error_code_name(static_cast<superres::ErrorCode>(status));
  return "Unknown";
}

const char* sr_last_error_message(void) { return g_last_error.c_str(); }

// ---- PSF -------------------------------------------------------------------

sr_status sr_psf_create_gaussian(double sigma, sr_psf** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new sr_psf{superres::PsfSpec::gaussian(sigma)};
  });
}

sr_status sr_psf_create_tabulated(const double* x, const double* values, size_t n,
                                  sr_psf** out) {
  return guarded([&] {
    require(out != nullptr && x != nullptr && values != nullptr, "null argument");
    *out = new sr_psf{superres::PsfSpec::tabulated(std::vector<double>(x, x + n),
                                                   std::vector<double>(values, values + n))};
  });
}

sr_status sr_psf_load(const char* path, sr_psf** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null argument");
    *out = new sr_psf{superres::PsfSpec::load_tabulated(path)};
  });
}

void sr_psf_destroy(sr_psf* psf) { delete psf; }

sr_status sr_psf_width(const sr_psf* psf, double* out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    *out = psf->spec.sigma();
  });
}

sr_status sr_psf_value(const sr_psf* psf, double x, double* out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    *out = superres::psf_value(psf->spec, x);
  });
}

sr_status sr_psf_is_gaussian(const sr_psf* psf, int* out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    *out = psf->spec.is_gaussian() ? 1 : 0;
  });
}

// ---- Overlaps --------------------------------------------------------------

sr_status sr_overlaps_compute(const sr_psf* psf, double theta2, sr_overlaps* out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    store_overlaps(superres::compute_overlaps(psf->spec, theta2), out);
  });
}

sr_status sr_overlaps_quadrature(const sr_psf* psf, double theta2, double half_range,
                                 int node_count, sr_quadrature_rule rule,
                                 sr_overlaps* out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    require(rule == SR_QUADRATURE_TRAPEZOID || rule == SR_QUADRATURE_GAUSS_LEGENDRE,
            "unknown quadrature rule");
    const superres::QuadratureConfig cfg{
        half_range, node_count,
        rule == SR_QUADRATURE_TRAPEZOID ? superres::QuadratureRule::kTrapezoid
                                        : superres::QuadratureRule::kGaussLegendre};
    store_overlaps(superres::compute_overlaps_quadrature(psf->spec, theta2, cfg), out);
  });
}

// ---- Model -----------------------------------------------------------------

sr_status sr_model_create(const sr_psf* psf, double theta1, double theta2, sr_model** out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    const superres::SceneParams scene(theta1, theta2);
    *out = new sr_model{psf->spec, superres::build_model(psf->spec, scene)};
  });
}

void sr_model_destroy(sr_model* model) { delete model; }

sr_status sr_model_overlaps(const sr_model* model, sr_overlaps* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    store_overlaps(model->model.overlaps, out);
  });
}

sr_status sr_model_matrix(const sr_model* model, sr_matrix_kind which, double out[16]) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const superres::QuantumModel& m = model->model;
    switch (which) {
      case SR_MATRIX_RHO: store(m.rho, out); return;
      case SR_MATRIX_L1: store(m.l1, out); return;
      case SR_MATRIX_L2: store(m.l2, out); return;
      case SR_MATRIX_DRHO1: store(m.drho1, out); return;
      case SR_MATRIX_DRHO2: store(m.drho2, out); return;
    }
    throw superres::InvalidArgument("unknown matrix kind");
  });
}

sr_status sr_model_qfi(const sr_model* model, sr_qfi* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const superres::QfiReport r = superres::qfi_matrix(model->model);
    store(r.qfi, out->qfi);
    out->c = r.c;
    out->c_closed_form = r.c_closed_form;
    out->c_discrepancy = r.c_discrepancy;
  });
}

// ---- Gauge -----------------------------------------------------------------

sr_status sr_model_gauge(const sr_model* model, sr_gauge_solver solver, sr_gauge* out) {
  if (model == nullptr || out == nullptr) return fail(SR_INVALID_ARGUMENT, "null argument");
  *out = sr_gauge{};
  return guarded([&] {
    const superres::QuantumModel& m = model->model;
    const auto d1 = superres::decompose_blocks(m.l1);
    const auto d2 = superres::decompose_blocks(m.l2);
    out->c0_residual = superres::necessary_condition_residual(d1, d2);
    const superres::GaugePair g = solve(m, to_source(solver));
    const auto p1 = superres::PauliVector::from_symmetric(g.k1);
    const auto p2 = superres::PauliVector::from_symmetric(g.k2);
    std::copy(p1.v.begin(), p1.v.end(), out->k1_pauli);
    std::copy(p2.v.begin(), p2.v.end(), out->k2_pauli);
    out->c1_residual = g.residuals.c1;
    out->c2_residual = g.residuals.c2;
    std::copy(g.residuals.c1_components.begin(), g.residuals.c1_components.end(),
              out->c1_components);
    std::copy(g.residuals.c2_components.begin(), g.residuals.c2_components.end(),
              out->c2_components);
    out->iterations = g.iterations;
    const superres::Matrix4 l1 = superres::assemble_sld(d1, g.k1);
    const superres::Matrix4 l2 = superres::assemble_sld(d2, g.k2);
    out->commutator_norm = superres::max_abs(superres::Matrix4(l1 * l2 - l2 * l1));
    const superres::JointBasis jb = superres::joint_eigenbasis(l1, l2);
    for (int j = 0; j < 4; ++j) {
      out->eigenvalues[2 * j] = jb.eigenvalues[j].l1;
      out->eigenvalues[2 * j + 1] = jb.eigenvalues[j].l2;
    }
    store(jb.vectors, out->basis);
  });
}

sr_status sr_model_gauge_json(const sr_model* model, char* buffer, size_t capacity,
                              size_t* needed) {
  std::string text;
  const sr_status st = guarded([&] {
    require(model != nullptr && needed != nullptr, "null argument");
    text = superres::gauge_diagnostics_json(model->model);
  });
  if (st != SR_OK) return st;
  *needed = text.size() + 1;
  if (buffer == nullptr || capacity < text.size() + 1)
    return fail(SR_BUFFER_TOO_SMALL, "diagnostics buffer too small");
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return SR_OK;
}

// ---- Measurements ----------------------------------------------------------

sr_status sr_measurement_direct(const sr_psf* psf, double pixel_width, double half_range,
                                sr_measurement** out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    superres::DirectImaging d = superres::DirectImaging::defaults(psf->spec);
    if (pixel_width > 0.0) d.pixel_width = pixel_width;
    if (half_range > 0.0) d.half_range = half_range;
    superres::validate_povm(d, psf->spec);
    make_measurement(d, out);
  });
}

sr_status sr_measurement_spade(const sr_psf* psf, double alignment, int q_max,
                               sr_measurement** out) {
  return guarded([&] {
    require(psf != nullptr && out != nullptr, "null argument");
    const superres::Spade s{alignment, q_max};
    superres::validate_povm(s, psf->spec);
    make_measurement(s, out);
  });
}

sr_status sr_measurement_joint(const sr_model* model, sr_gauge_solver solver,
                               sr_measurement** out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    make_measurement(superres::joint_optimal_povm(model->model, to_source(solver)), out);
  });
}

sr_status sr_measurement_sld(const sr_model* model, int j, sr_measurement** out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    require(j == 1 || j == 2, "parameter index must be 1 or 2");
    make_measurement(superres::sld_eigenbasis_povm(model->model, j), out);
  });
}

sr_status sr_measurement_projective(const sr_psf* psf, const double basis[16],
                                    sr_measurement** out) {
  return guarded([&] {
    require(psf != nullptr && basis != nullptr && out != nullptr, "null argument");
    superres::ProjectiveE p{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) p.basis(i, j) = basis[4 * i + j];
    superres::validate_povm(p, psf->spec);
    make_measurement(p, out);
  });
}

void sr_measurement_destroy(sr_measurement* m) { delete m; }

sr_status sr_measurement_outcome_count(const sr_measurement* m, size_t* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = superres::outcome_count(m->povm);
  });
}

sr_status sr_measurement_distribution(const sr_measurement* m, const sr_model* model,
                                      double* probs, double* dp1, double* dp2,
                                      size_t capacity) {
  return guarded([&] {
    require(m != nullptr && model != nullptr && probs != nullptr, "null argument");
    const auto dist = superres::outcome_distribution(m->povm, model->psf,
                                                     model->model.scene, model->model);
    if (capacity < dist.probs.size())
      throw superres::InvalidArgument("output capacity smaller than the outcome count");
    std::copy(dist.probs.begin(), dist.probs.end(), probs);
    if (dp1 != nullptr) std::copy(dist.dp1.begin(), dist.dp1.end(), dp1);
    if (dp2 != nullptr) std::copy(dist.dp2.begin(), dist.dp2.end(), dp2);
  });
}

sr_status sr_measurement_regrets(const sr_measurement* m, const sr_model* model,
                                 sr_regrets* out) {
  return guarded([&] {
    require(m != nullptr && model != nullptr && out != nullptr, "null argument");
    const auto r = superres::evaluate_measurement(m->povm, model->psf, model->model);
    store(r.fim, out->fim);
    store(r.qfi, out->qfi);
    out->delta1 = r.delta1;
    out->delta2 = r.delta2;
    out->c = r.c;
    out->irtr_slack = r.irtr_slack;
    out->order_margin = r.order_margin;
  });
}

// ---- Simulation ------------------------------------------------------------

sr_status sr_trial_config_default(const sr_model* model, sr_trial_config* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const superres::TrialConfig d;
    const auto box = superres::SearchBox::around(model->model.scene, model->psf);
    *out = {d.photons, d.trials, d.seed, box.theta1_lo, box.theta1_hi,
            box.theta2_lo, box.theta2_hi, d.threads};
  });
}

sr_status sr_sample_outcomes(const sr_measurement* m, const sr_model* model,
                             uint64_t photons, uint64_t seed, uint64_t* counts,
                             size_t capacity) {
  return guarded([&] {
    require(m != nullptr && model != nullptr && counts != nullptr, "null argument");
    const auto c = superres::sample_outcomes(m->povm, model->psf, model->model.scene,
                                             photons, seed);
    if (capacity < c.size())
      throw superres::InvalidArgument("output capacity smaller than the outcome count");
    std::copy(c.begin(), c.end(), counts);
  });
}

sr_status sr_simulate(const sr_measurement* m, const sr_model* model,
                      const sr_trial_config* config, sr_trial_summary* out,
                      double* estimates) {
  return guarded([&] {
    require(m != nullptr && model != nullptr && config != nullptr && out != nullptr,
            "null argument");
    superres::TrialConfig cfg;
    cfg.photons = config->photons;
    cfg.trials = config->trials;
    cfg.seed = config->seed;
    cfg.box = {config->theta1_lo, config->theta1_hi, config->theta2_lo, config->theta2_hi};
    cfg.threads = config->threads;
    const auto r = superres::run_trials(m->povm, model->psf, model->model.scene, cfg);
    store(r.mean, out->mean);
    store(r.empirical_cov, out->cov);
    store(r.crb, out->crb);
    store(r.ratio, out->ratio);
    out->boundary_fraction = r.boundary_fraction;
    out->boundary_warning = r.boundary_warning ? 1 : 0;
    if (estimates != nullptr) {
      for (std::size_t i = 0; i < r.estimates.size(); ++i) {
        estimates[2 * i] = r.estimates[i].theta1;
        estimates[2 * i + 1] = r.estimates[i].theta2;
      }
    }
  });
}

}  // extern "C"
