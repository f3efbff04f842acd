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

#include "json.hpp"

#include "superres/errors.hpp"
#include "superres/sld_algebra.hpp"

namespace sr = superres;

namespace {

sr::QuantumModel gaussian_model(double theta2, double theta1 = 0.0) {
  return sr::build_model(sr::PsfSpec::gaussian(1.0), sr::SceneParams(theta1, theta2));
}

double commutator_norm(const sr::Matrix4& a, const sr::Matrix4& b) {
  return sr::max_abs(a * b - b * a);
}

}  // namespace

TEST_CASE("block decomposition round-trips") {
  const auto m = gaussian_model(2.0);
  const auto d1 = sr::decompose_blocks(m.l1);
  const auto d2 = sr::decompose_blocks(m.l2);
  CHECK(sr::reassemble(d1) == m.l1);
  CHECK(sr::reassemble(d2) == m.l2);
  CHECK(sr::max_abs(d1.k) == 0.0);
  CHECK(sr::max_abs(d2.k) == 0.0);
  CHECK(d1.b(0, 0) == 0.0);
  CHECK(d1.b(1, 1) == 0.0);
  const auto& ov = m.overlaps;
  CHECK(d1.b(0, 1) == doctest::Approx(2.0 * ov.eta4 / std::sqrt(1.0 - ov.delta)).epsilon(1e-15));
  CHECK(d1.b(1, 0) == doctest::Approx(2.0 * ov.eta3 / std::sqrt(1.0 + ov.delta)).epsilon(1e-15));
  CHECK(std::abs(d1.b(0, 1) - 1.399809) <= 1e-4);
  CHECK(std::abs(d1.b(1, 0) - 0.201167) <= 1e-4);

  const auto id = sr::decompose_blocks(sr::Matrix4::Identity());
  CHECK(id.a == sr::Matrix2::Identity());
  CHECK(id.b == sr::Matrix2::Zero());
  CHECK(id.k == sr::Matrix2::Identity());

  sr::Matrix4 bad = sr::Matrix4::Zero();
  bad(0, 3) = 1.0;
  CHECK_THROWS_AS(sr::decompose_blocks(bad), sr::ShapeError);
}

TEST_CASE("Pauli coefficients round-trip") {
  sr::Matrix2 x;
  x << 1.3, -0.4, -0.4, 0.2;
  const auto p = sr::PauliVector::from_symmetric(x);
  CHECK(p.v[0] == doctest::Approx(0.75));
  CHECK(p.v[1] == doctest::Approx(-0.4));
  CHECK(p.v[2] == 0.0);
  CHECK(p.v[3] == doctest::Approx(0.55));
  CHECK(sr::max_abs(p.to_symmetric() - x) <= 1e-15);

  Eigen::Matrix2cd h;
  h << std::complex<double>(1.0, 0.0), std::complex<double>(0.5, -0.25),
      std::complex<double>(0.5, 0.25), std::complex<double>(-2.0, 0.0);
  const auto q = sr::PauliVector::from_hermitian(h);
  CHECK(q.v[2] == doctest::Approx(0.25));
  CHECK((q.to_hermitian() - h).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(q.to_symmetric(), sr::ShapeError);

  Eigen::Matrix2cd nh = h;
  nh(0, 1) = std::complex<double>(0.7, 0.0);
  CHECK_THROWS_AS(sr::PauliVector::from_hermitian(nh), sr::ShapeError);
}

TEST_CASE("necessary condition holds only at the Rayleigh distance") {
  const auto at = gaussian_model(2.0);
  CHECK(sr::necessary_condition_residual(sr::decompose_blocks(at.l1),
                                         sr::decompose_blocks(at.l2)) <= 1e-12);
  const auto off = gaussian_model(1.0);
  CHECK(sr::necessary_condition_residual(sr::decompose_blocks(off.l1),
                                         sr::decompose_blocks(off.l2)) > 1e-3);
  const auto d = sr::decompose_blocks(off.l1);
  CHECK(sr::necessary_condition_residual(d, d) == 0.0);

  // The residual tracks |beta| along a sweep.
  for (double t2 : {0.5, 1.0, 1.5, 2.5, 3.0, 4.0}) {
    const auto m = gaussian_model(t2);
    const double r = sr::necessary_condition_residual(sr::decompose_blocks(m.l1),
                                                      sr::decompose_blocks(m.l2));
    CHECK(r > 0.0);
    CHECK(r / std::abs(m.overlaps.beta) > 1e-3);
  }
}

TEST_CASE("closed-form gauge at the Rayleigh distance") {
  const auto m = gaussian_model(2.0);
  const sr::GaugePair g = sr::closed_form_gauge(m.overlaps);
  const auto k1 = sr::PauliVector::from_symmetric(g.k1);
  const auto k2 = sr::PauliVector::from_symmetric(g.k2);
  CHECK(std::abs(k1.v[0] - 0.689204) <= 1e-6);
  CHECK(std::abs(k1.v[3] - 0.581977) <= 1e-6);
  CHECK(std::abs(k2.v[1] - -0.184594) <= 1e-4);
  CHECK(std::abs(k2.v[3] - -0.656211) <= 1e-4);
  CHECK(k2.v[1] == doctest::Approx(-0.18459762).epsilon(1e-7));
  CHECK(k2.v[3] == doctest::Approx(-0.65625205).epsilon(1e-7));
  CHECK(k1.v[1] == 0.0);
  CHECK(k2.v[0] == 0.0);
  CHECK(g.source == sr::GaugeSource::kClosedForm);

  const auto l1 = sr::assemble_sld(sr::decompose_blocks(m.l1), g.k1);
  const auto l2 = sr::assemble_sld(sr::decompose_blocks(m.l2), g.k2);
  CHECK(commutator_norm(l1, l2) <= 1e-10);
  CHECK(g.residuals.c0 <= 1e-12);
  CHECK(g.residuals.c1 <= 1e-10);
  CHECK(g.residuals.c2 <= 1e-10);
}

TEST_CASE("closed-form gauge away from the Rayleigh distance") {
  CHECK_THROWS_AS(sr::closed_form_gauge(gaussian_model(1.0).overlaps), sr::GaugeInvalid);
  try {
    sr::closed_form_gauge(gaussian_model(1.0).overlaps);
  } catch (const sr::GaugeInvalid& e) {
    CHECK(e.residual() > 1e-3);
  }
  sr::OverlapSet flat = gaussian_model(2.0).overlaps;
  flat.gamma = 0.0;
  CHECK_THROWS_AS(sr::closed_form_gauge(flat), sr::DomainError);
}

TEST_CASE("least-norm solver") {
  const auto m = gaussian_model(2.0);
  const auto d1 = sr::decompose_blocks(m.l1);
  const auto d2 = sr::decompose_blocks(m.l2);
  const sr::GaugePair g = sr::solve_gauge_least_norm(d1, d2);
  CHECK(g.source == sr::GaugeSource::kLeastNorm);
  CHECK(g.residuals.c1 <= 1e-10);
  CHECK(g.residuals.c2 <= 1e-10);
  CHECK(commutator_norm(sr::assemble_sld(d1, g.k1), sr::assemble_sld(d2, g.k2)) <= 1e-10);

  const sr::GaugePair hinted =
      sr::solve_gauge_least_norm(d1, d2, sr::PauliVector::from_symmetric(
                                             sr::closed_form_gauge(m.overlaps).k1).v[0]);
  CHECK(commutator_norm(sr::assemble_sld(d1, hinted.k1), sr::assemble_sld(d2, hinted.k2)) <=
        1e-10);

  const auto off = gaussian_model(1.0);
  CHECK_THROWS_AS(sr::solve_gauge_least_norm(sr::decompose_blocks(off.l1),
                                             sr::decompose_blocks(off.l2)),
                  sr::NoSolution);
}

TEST_CASE("least-norm solver with vacuous conditions") {
  sr::BlockDecomposition d1{sr::Matrix2::Identity(), sr::Matrix2::Zero(), sr::Matrix2::Zero()};
  sr::BlockDecomposition d2{2.0 * sr::Matrix2::Identity(), sr::Matrix2::Zero(),
                            sr::Matrix2::Zero()};
  const auto g = sr::solve_gauge_least_norm(d1, d2);
  CHECK(sr::max_abs(g.k1) == 0.0);
  CHECK(sr::max_abs(g.k2) == 0.0);
}

TEST_CASE("gauge freedom leaves the SLD equation and the QFI unchanged") {
  const auto m = gaussian_model(1.4, 0.2);
  sr::Matrix2 k1, k2;
  k1 << 0.7, -1.1, -1.1, 2.3;
  k2 << -3.0, 0.4, 0.4, 0.9;
  const auto l1 = sr::assemble_sld(sr::decompose_blocks(m.l1), k1);
  const auto l2 = sr::assemble_sld(sr::decompose_blocks(m.l2), k2);
  CHECK(sr::sld_residual(m, l1, 1) <= 1e-12);
  CHECK(sr::sld_residual(m, l2, 2) <= 1e-12);
  CHECK(std::abs(sr::qfi_entry(m.rho, l1, l1) - sr::qfi_entry(m.rho, m.l1, m.l1)) <= 1e-12);
  CHECK(std::abs(sr::qfi_entry(m.rho, l2, l2) - sr::qfi_entry(m.rho, m.l2, m.l2)) <= 1e-12);
  CHECK(std::abs(sr::qfi_entry(m.rho, l1, l2) - sr::qfi_entry(m.rho, m.l1, m.l2)) <= 1e-12);
  CHECK(sr::assemble_sld(sr::decompose_blocks(m.l1), sr::Matrix2::Zero()) == m.l1);
  sr::Matrix2 asym;
  asym << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(sr::assemble_sld(sr::decompose_blocks(m.l1), asym), sr::ShapeError);
}

TEST_CASE("joint eigenbasis of the closed-form pair") {
  const auto m = gaussian_model(2.0);
  const auto g = sr::closed_form_gauge(m.overlaps);
  const auto l1 = sr::assemble_sld(sr::decompose_blocks(m.l1), g.k1);
  const auto l2 = sr::assemble_sld(sr::decompose_blocks(m.l2), g.k2);
  const sr::JointBasis jb = sr::joint_eigenbasis(l1, l2);
  const sr::Matrix4& v = jb.vectors;
  CHECK(sr::max_abs(v.transpose() * v - sr::Matrix4::Identity()) <= 1e-12);
  const sr::Matrix4 t1 = v.transpose() * l1 * v;
  const sr::Matrix4 t2 = v.transpose() * l2 * v;
  for (int i = 0; i < 4; ++i) {
    CHECK(t1(i, i) == doctest::Approx(jb.eigenvalues[i].l1).epsilon(1e-12));
    CHECK(t2(i, i) == doctest::Approx(jb.eigenvalues[i].l2).epsilon(1e-12));
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      CHECK(std::abs(t1(i, j)) <= 1e-10);
      CHECK(std::abs(t2(i, j)) <= 1e-10);
    }
    const Eigen::Index top = [&] {
      Eigen::Index r;
      v.col(i).cwiseAbs().maxCoeff(&r);
      return r;
    }();
    CHECK(v(top, i) > 0.0);
  }
  for (int i = 0; i + 1 < 4; ++i) CHECK(jb.eigenvalues[i].l1 >= jb.eigenvalues[i + 1].l1);

  const sr::JointBasis again = sr::joint_eigenbasis(l1, l2);
  CHECK(again.vectors == jb.vectors);

  double total = 0.0;
  for (int j = 0; j < 4; ++j) total += v.col(j).dot(m.rho * v.col(j));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("joint eigenbasis of diagonal and degenerate pairs") {
  const sr::Matrix4 a = Eigen::Vector4d(1, 2, 3, 4).asDiagonal();
  const sr::Matrix4 b = Eigen::Vector4d(4, 3, 2, 1).asDiagonal();
  const auto jb = sr::joint_eigenbasis(a, b);
  for (int i = 0; i < 4; ++i) {
    CHECK(jb.eigenvalues[i].l1 == doctest::Approx(4 - i));
    CHECK(std::abs(jb.vectors(3 - i, i)) == doctest::Approx(1.0));
  }

  sr::Matrix4 s;
  s << 2, 1, 0, 0, 1, 2, 0, 0, 0, 0, 5, 0, 0, 0, 0, -1;
  const auto deg = sr::joint_eigenbasis(sr::Matrix4::Identity(), s);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector4d c = deg.vectors.col(i);
    CHECK((s * c - deg.eigenvalues[i].l2 * c).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(deg.eigenvalues[0].l2 == doctest::Approx(5.0));
  CHECK(deg.eigenvalues[3].l2 == doctest::Approx(-1.0));

  const auto m = gaussian_model(1.0);
  CHECK_THROWS_AS(sr::joint_eigenbasis(m.l1, m.l2), sr::NotCommuting);
}

TEST_CASE("joint basis wavefunctions are orthonormal") {
  const auto psf = sr::PsfSpec::gaussian(1.0);
  const sr::SceneParams scene(0.0, 2.0);
  const auto m = sr::build_model(psf, scene);
  const auto g = sr::closed_form_gauge(m.overlaps);
  const auto jb = sr::joint_eigenbasis(sr::assemble_sld(sr::decompose_blocks(m.l1), g.k1),
                                       sr::assemble_sld(sr::decompose_blocks(m.l2), g.k2));
  const double h = 0.01;
  sr::Matrix4 gram = sr::Matrix4::Zero();
  Eigen::Vector4d psi1 = Eigen::Vector4d::Zero();
  for (int i = -1400; i <= 1400; ++i) {
    const double x = i * h;
    Eigen::Vector4d q;
    for (int j = 0; j < 4; ++j) q(j) = sr::joint_basis_wavefunction(jb, psf, scene, j + 1, x);
    gram += h * q * q.transpose();
    psi1 += h * q * sr::psf_value(psf, x - scene.x1());
  }
  CHECK(sr::max_abs(gram - sr::Matrix4::Identity()) <= 1e-6);
  CHECK(psi1.squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("diagnostics dump") {
  const auto at = nlohmann::json::parse(sr::gauge_diagnostics_json(gaussian_model(2.0)));
  REQUIRE(at["solvers"].size() == 2);
  for (const auto& entry : at["solvers"]) {
    CHECK(entry["status"] == "ok");
    CHECK(entry["commutator_norm"].get<double>() <= 1e-10);
  }
  const auto off = nlohmann::json::parse(sr::gauge_diagnostics_json(gaussian_model(1.0)));
  for (const auto& entry : off["solvers"]) CHECK(entry["status"] == "no_solution");
  CHECK(off["c0_residual"].get<double>() > 1e-3);
}
