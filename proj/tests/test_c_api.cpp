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
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "superres/superres.h"

namespace {

struct Psf {
  sr_psf* p = nullptr;
  explicit Psf(double sigma) { REQUIRE(sr_psf_create_gaussian(sigma, &p) == SR_OK); }
  ~Psf() { sr_psf_destroy(p); }
};

struct Model {
  sr_model* m = nullptr;
  Model(const Psf& psf, double t1, double t2) {
    REQUIRE(sr_model_create(psf.p, t1, t2, &m) == SR_OK);
  }
  ~Model() { sr_model_destroy(m); }
};

struct Measurement {
  sr_measurement* m = nullptr;
  ~Measurement() { sr_measurement_destroy(m); }
};

}  // namespace

TEST_CASE("status codes and messages") {
  sr_psf* psf = nullptr;
  CHECK(sr_psf_create_gaussian(-1.0, &psf) == SR_INVALID_ARGUMENT);
  CHECK(psf == nullptr);
  CHECK(std::strlen(sr_last_error_message()) > 0);
  CHECK(std::string(sr_status_name(SR_SINGULAR_BASIS)) == "SingularBasis");
  CHECK(std::string(sr_status_name(SR_OK)) == "OK");
  CHECK(sr_psf_load("/nonexistent/psf.txt", &psf) == SR_IO_ERROR);
  sr_psf_destroy(nullptr);
  sr_model_destroy(nullptr);
  sr_measurement_destroy(nullptr);
}

TEST_CASE("overlaps and QFI through the C boundary") {
  Psf psf(1.0);
  sr_overlaps ov{};
  REQUIRE(sr_overlaps_compute(psf.p, 2.0, &ov) == SR_OK);
  CHECK(ov.beta == 0.0);
  CHECK(ov.delta == doctest::Approx(std::exp(-0.5)));
  sr_overlaps q{};
  REQUIRE(sr_overlaps_quadrature(psf.p, 2.0, 12.0, 2001, SR_QUADRATURE_TRAPEZOID, &q) == SR_OK);
  CHECK(std::abs(q.beta) <= 1e-12);
  CHECK(sr_overlaps_quadrature(psf.p, 2.0, 12.0, 2000, SR_QUADRATURE_TRAPEZOID, &q) ==
        SR_INVALID_ARGUMENT);
  CHECK(sr_overlaps_compute(psf.p, 1e-10, &ov) == SR_SINGULAR_BASIS);

  Model model(psf, 0.0, 2.0);
  sr_qfi qfi{};
  REQUIRE(sr_model_qfi(model.m, &qfi) == SR_OK);
  CHECK(qfi.qfi[0] == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(qfi.qfi[3] == doctest::Approx(0.25));
  CHECK(qfi.c <= 1e-12);

  double rho[16];
  REQUIRE(sr_model_matrix(model.m, SR_MATRIX_RHO, rho) == SR_OK);
  CHECK(rho[0] + rho[5] + rho[10] + rho[15] == doctest::Approx(1.0));
  CHECK(sr_model_matrix(model.m, static_cast<sr_matrix_kind>(9), rho) == SR_INVALID_ARGUMENT);
}

TEST_CASE("gauge results through the C boundary") {
  Psf psf(1.0);
  Model at(psf, 0.0, 2.0);
  for (auto solver : {SR_GAUGE_CLOSED_FORM, SR_GAUGE_LEAST_NORM}) {
    sr_gauge g{};
    REQUIRE(sr_model_gauge(at.m, solver, &g) == SR_OK);
    CHECK(g.commutator_norm <= 1e-10);
    CHECK(g.c0_residual <= 1e-12);
  }
  sr_gauge g{};
  REQUIRE(sr_model_gauge(at.m, SR_GAUGE_CLOSED_FORM, &g) == SR_OK);
  CHECK(g.k1_pauli[0] == doctest::Approx(0.689204).epsilon(1e-5));

  Model off(psf, 0.0, 1.0);
  CHECK(sr_model_gauge(off.m, SR_GAUGE_LEAST_NORM, &g) == SR_NO_SOLUTION);
  CHECK(g.c0_residual > 1e-3);
  CHECK(g.commutator_norm == 0.0);
  CHECK(sr_model_gauge(off.m, SR_GAUGE_CLOSED_FORM, &g) == SR_GAUGE_INVALID);

  size_t needed = 0;
  CHECK(sr_model_gauge_json(at.m, nullptr, 0, &needed) == SR_BUFFER_TOO_SMALL);
  std::vector<char> buf(needed);
  REQUIRE(sr_model_gauge_json(at.m, buf.data(), buf.size(), &needed) == SR_OK);
  CHECK(std::string(buf.data()).find("\"solvers\"") != std::string::npos);
}

TEST_CASE("measurements through the C boundary") {
  Psf psf(1.0);
  Model model(psf, 0.0, 2.0);

  Measurement joint;
  REQUIRE(sr_measurement_joint(model.m, SR_GAUGE_CLOSED_FORM, &joint.m) == SR_OK);
  size_t n = 0;
  REQUIRE(sr_measurement_outcome_count(joint.m, &n) == SR_OK);
  CHECK(n == 5);
  std::vector<double> p(n), d1(n), d2(n);
  REQUIRE(sr_measurement_distribution(joint.m, model.m, p.data(), d1.data(), d2.data(), n) ==
          SR_OK);
  CHECK(p[0] + p[1] + p[2] + p[3] + p[4] == doctest::Approx(1.0));
  CHECK(sr_measurement_distribution(joint.m, model.m, p.data(), nullptr, nullptr, 2) ==
        SR_INVALID_ARGUMENT);
  sr_regrets r{};
  REQUIRE(sr_measurement_regrets(joint.m, model.m, &r) == SR_OK);
  CHECK(r.delta1 <= 1e-4);
  CHECK(r.delta2 <= 1e-4);

  Measurement spade;
  REQUIRE(sr_measurement_spade(psf.p, 0.0, 20, &spade.m) == SR_OK);
  REQUIRE(sr_measurement_regrets(spade.m, model.m, &r) == SR_OK);
  CHECK(r.delta2 <= 1e-3);
  CHECK(r.delta1 > 0.1);
  Measurement far;
  REQUIRE(sr_measurement_spade(psf.p, 9.0, 20, &far.m) == SR_OK);
  CHECK(sr_measurement_regrets(far.m, model.m, &r) == SR_ALIGNMENT_OUT_OF_RANGE);

  Measurement direct;
  REQUIRE(sr_measurement_direct(psf.p, 0.05, 0.0, &direct.m) == SR_OK);
  REQUIRE(sr_measurement_regrets(direct.m, model.m, &r) == SR_OK);
  CHECK(r.delta2 > 0.1);
  CHECK(r.irtr_slack >= -1e-10);

  Measurement sld;
  CHECK(sr_measurement_sld(model.m, 3, &sld.m) == SR_INVALID_ARGUMENT);
  REQUIRE(sr_measurement_sld(model.m, 2, &sld.m) == SR_OK);

  const double eye[16] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  Measurement proj;
  REQUIRE(sr_measurement_projective(psf.p, eye, &proj.m) == SR_OK);
  const double bad[16] = {1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  Measurement skew;
  CHECK(sr_measurement_projective(psf.p, bad, &skew.m) == SR_INVALID_ARGUMENT);

  Model near(psf, 0.0, 1.0);
  Measurement none;
  CHECK(sr_measurement_joint(near.m, SR_GAUGE_LEAST_NORM, &none.m) == SR_NO_SOLUTION);
}

TEST_CASE("simulation through the C boundary") {
  Psf psf(1.0);
  Model model(psf, 0.0, 2.0);
  Measurement joint;
  REQUIRE(sr_measurement_joint(model.m, SR_GAUGE_CLOSED_FORM, &joint.m) == SR_OK);

  uint64_t counts[5];
  REQUIRE(sr_sample_outcomes(joint.m, model.m, 1000, 7, counts, 5) == SR_OK);
  CHECK(counts[0] + counts[1] + counts[2] + counts[3] + counts[4] == 1000);

  sr_trial_config cfg{};
  REQUIRE(sr_trial_config_default(model.m, &cfg) == SR_OK);
  CHECK(cfg.theta2_lo == doctest::Approx(0.5));
  cfg.photons = 5000;
  cfg.trials = 60;
  sr_trial_summary s{};
  std::vector<double> est(2 * cfg.trials);
  REQUIRE(sr_simulate(joint.m, model.m, &cfg, &s, est.data()) == SR_OK);
  CHECK(s.mean[1] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(s.ratio[0] > 0.0);
  cfg.trials = 0;
  CHECK(sr_simulate(joint.m, model.m, &cfg, &s, nullptr) == SR_INVALID_ARGUMENT);
}
