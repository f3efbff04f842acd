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
#pragma once

// Four-dimensional representation of the one-photon state of two incoherent
// sources, in the orthonormal basis (e1, e2 | e3, e4) built from the two
// displaced PSFs and their displacement derivatives. rho is supported on
// span{e1, e2}; its derivatives also touch span{e3, e4}.

#include <Eigen/Dense>
#include <array>
#include <utility>

#include "superres/psf.hpp"

namespace superres {

/// Real symmetric 4x4 operator in the e-basis (row-major on the C boundary).
using Matrix4 = Eigen::Matrix4d;
using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;

/// True if m is symmetric within 1e-14 of its largest absolute entry.
bool is_symmetric(const Matrix4& m, double rel_tol = 1e-14) noexcept;

/// Max-abs entry norm used for every residual in this library.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

struct QuantumModel {
  SceneParams scene;
  OverlapSet overlaps;
  Matrix4 rho;
  Matrix4 l1;  // canonical SLD for the centroid
  Matrix4 l2;  // canonical SLD for the separation
  Matrix4 drho1;
  Matrix4 drho2;

  const Matrix4& sld(int j) const { return j == 1 ? l1 : l2; }
  const Matrix4& drho(int j) const { return j == 1 ? drho1 : drho2; }
};

struct QfiReport {
  Matrix2 qfi;
  /// Incompatibility coefficient from the trace norm of sqrt(rho)[L1,L2]sqrt(rho).
  double c = 0.0;
  /// sqrt(beta^2 / (kappa (kappa - gamma^2))), the closed form.
  double c_closed_form = 0.0;
  /// |c - c_closed_form|.
  double c_discrepancy = 0.0;
  /// Sum of singular values attributable to the kernel block (expected 0).
  double kernel_trace_norm = 0.0;
};

/// Canonical SLD pair (L1, L2) in the e-basis; depends on the overlaps only.
std::pair<Matrix4, Matrix4> canonical_slds(const OverlapSet& ov);

/// Throws what compute_overlaps throws; SingularBasis if delta is within
/// 1e-12 of 1.
QuantumModel build_model(const PsfSpec& psf, const SceneParams& scene);

/// ||d_j rho - (L_j rho + rho L_j)/2||_max for a candidate SLD.
double sld_residual(const QuantumModel& model, const Matrix4& sld, int j);

QfiReport qfi_matrix(const QuantumModel& model);

/// Re tr(rho A B) for two candidate SLDs.
double qfi_entry(const Matrix4& rho, const Matrix4& a, const Matrix4& b);

/// Position-space realization of the e-basis for a fixed scene.
///
/// Each e_k is a combination of four atoms
///   psi(x - X1), psi(x - X2), -psi'(x - X1), -psi'(x - X2),
/// the last two being d psi(x - Xj) / d Xj.
class EBasis {
 public:
  EBasis(const PsfSpec& psf, const SceneParams& scene);

  /// e_k(x) for k in 1..4.
  double value(int k, double x) const;
  /// Atom amplitudes at x.
  std::array<double, 4> atoms(double x) const;
  /// Row k-1 holds the atom coefficients of e_k.
  const Matrix4& coefficients() const noexcept { return coeffs_; }
  /// Atom centres (X1, X2, X1, X2).
  std::array<double, 4> anchors() const noexcept {
    return {scene_.x1(), scene_.x2(), scene_.x1(), scene_.x2()};
  }
  const OverlapSet& overlaps() const noexcept { return overlaps_; }
  const PsfSpec& psf() const noexcept { return psf_; }
  const SceneParams& scene() const noexcept { return scene_; }

 private:
  PsfSpec psf_;
  SceneParams scene_;
  OverlapSet overlaps_;
  Matrix4 coeffs_;
};

/// e_k(x), k in 1..4. Rebuilds the basis on each call; use EBasis in loops.
double basis_wavefunction(const PsfSpec& psf, const SceneParams& scene, int k,
                          double x);

}  // namespace superres
