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
#include "superres/state_model.hpp"

#include <cmath>
#include <sstream>

#include "superres/errors.hpp"

namespace superres {

bool is_symmetric(const Matrix4& m, double rel_tol) noexcept {
  const double scale = max_abs(m);
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

std::pair<Matrix4, Matrix4> canonical_slds(const OverlapSet& ov) {
  const double d = ov.delta;
  const double g = ov.gamma;

  Matrix4 l1 = Matrix4::Zero();
  l1(0, 1) = l1(1, 0) = 2.0 * g * d / std::sqrt(1.0 - d * d);
  l1(0, 3) = l1(3, 0) = 2.0 * ov.eta4 / std::sqrt(1.0 - d);
  l1(1, 2) = l1(2, 1) = 2.0 * ov.eta3 / std::sqrt(1.0 + d);

  Matrix4 l2 = Matrix4::Zero();
  l2(0, 0) = -g / (1.0 - d);
  l2(1, 1) = g / (1.0 + d);
  l2(0, 2) = l2(2, 0) = -ov.eta3 / std::sqrt(1.0 - d);
  l2(1, 3) = l2(3, 1) = -ov.eta4 / std::sqrt(1.0 + d);
  return {l1, l2};
}

QuantumModel build_model(const PsfSpec& psf, const SceneParams& scene) {
  const OverlapSet ov = compute_overlaps(psf, scene.theta2());
  auto [l1, l2] = canonical_slds(ov);
  QuantumModel m{scene, ov, Matrix4::Zero(), l1, l2, Matrix4::Zero(),
                 Matrix4::Zero()};
  m.rho(0, 0) = 0.5 * (1.0 - ov.delta);
  m.rho(1, 1) = 0.5 * (1.0 + ov.delta);

  m.drho1 = 0.5 * (m.l1 * m.rho + m.rho * m.l1);
  m.drho2 = 0.5 * (m.l2 * m.rho + m.rho * m.l2);
  return m;
}

double sld_residual(const QuantumModel& model, const Matrix4& sld, int j) {
  const Matrix4 sym = 0.5 * (sld * model.rho + model.rho * sld);
  return max_abs(model.drho(j) - sym);
}

double qfi_entry(const Matrix4& rho, const Matrix4& a, const Matrix4& b) {
  return (rho * a * b).trace();
}

QfiReport qfi_matrix(const QuantumModel& model) {
  QfiReport r;
  r.qfi(0, 0) = qfi_entry(model.rho, model.l1, model.l1);
  r.qfi(1, 1) = qfi_entry(model.rho, model.l2, model.l2);
  r.qfi(0, 1) = r.qfi(1, 0) =
      0.5 * (qfi_entry(model.rho, model.l1, model.l2) +
             qfi_entry(model.rho, model.l2, model.l1));

  // rho is diagonal, so its square root is entrywise.
  const Matrix4 sqrt_rho = model.rho.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Matrix4 commutator = model.l1 * model.l2 - model.l2 * model.l1;
  const Matrix4 core = sqrt_rho * commutator * sqrt_rho;
  const double trace_norm =
      Eigen::JacobiSVD<Matrix4>(core).singularValues().sum();
  const double support_norm =
      Eigen::JacobiSVD<Matrix2>(Matrix2(core.topLeftCorner<2, 2>()))
          .singularValues()
          .sum();
  r.kernel_trace_norm = std::abs(trace_norm - support_norm);

  const double denom = 2.0 * std::sqrt(r.qfi(0, 0) * r.qfi(1, 1));
  r.c = denom > 0.0 ? std::min(trace_norm / denom, 1.0) : 0.0;

  const OverlapSet& ov = model.overlaps;
  const double c2 =
      ov.beta * ov.beta / (ov.kappa * (ov.kappa - ov.gamma * ov.gamma));
  r.c_closed_form = std::sqrt(std::max(c2, 0.0));
  r.c_discrepancy = std::abs(r.c - r.c_closed_form);
  return r;
}

EBasis::EBasis(const PsfSpec& psf, const SceneParams& scene)
    : psf_(psf), scene_(scene), overlaps_(compute_overlaps(psf, scene.theta2())) {
  const double d = overlaps_.delta;
  const double g = overlaps_.gamma;
  if (overlaps_.eta3 <= kSingularDeltaMargin ||
      overlaps_.eta4 <= kSingularDeltaMargin) {
    std::ostringstream msg;
    msg << "derivative basis vectors vanish (eta3 = " << overlaps_.eta3
        << ", eta4 = " << overlaps_.eta4 << ")";
    throw SingularBasis(msg.str());
  }
  const double s2 = std::sqrt(2.0);
  coeffs_.setZero();
  coeffs_.row(0) << 1.0, -1.0, 0.0, 0.0;
  coeffs_.row(0) /= std::sqrt(2.0 * (1.0 - d));
  coeffs_.row(1) << 1.0, 1.0, 0.0, 0.0;
  coeffs_.row(1) /= std::sqrt(2.0 * (1.0 + d));
  Eigen::RowVector4d sum(0.0, 0.0, 1.0 / s2, 1.0 / s2);
  Eigen::RowVector4d diff(0.0, 0.0, 1.0 / s2, -1.0 / s2);
  coeffs_.row(2) =
      (sum - g / std::sqrt(1.0 - d) * coeffs_.row(0)) / overlaps_.eta3;
  coeffs_.row(3) =
      (diff + g / std::sqrt(1.0 + d) * coeffs_.row(1)) / overlaps_.eta4;
}

std::array<double, 4> EBasis::atoms(double x) const {
  const double x1 = scene_.x1();
  const double x2 = scene_.x2();
  return {psf_value(psf_, x - x1), psf_value(psf_, x - x2),
          -psf_derivative(psf_, x - x1), -psf_derivative(psf_, x - x2)};
}

double EBasis::value(int k, double x) const {
  if (k < 1 || k > 4) throw InvalidArgument("basis index must be in 1..4");
  const auto a = atoms(x);
  double v = 0.0;
  for (int i = 0; i < 4; ++i) v += coeffs_(k - 1, i) * a[i];
  return v;
}

double basis_wavefunction(const PsfSpec& psf, const SceneParams& scene, int k,
                          double x) {
  return EBasis(psf, scene).value(k, x);
}

}  // namespace superres
