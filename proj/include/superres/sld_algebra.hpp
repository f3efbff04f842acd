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

// Gauge freedom of symmetric logarithmic derivatives.
//
// With H = S (+) K, S = span{e1, e2} the support of rho and K = span{e3, e4},
// an SLD is written in blocks
//
//   L_j = [ A_j    B_j ]
//         [ B_j^T  K_j ]
//
// A_j and B_j are fixed by the SLD equation; K_j is free. L1 and L2 commute
// iff
//
//   (C0)  A1 A2 - A2 A1 = B2 B1^T - B1 B2^T
//   (C1)  B1 K2 - B2 K1 = A2 B1 - A1 B2
//   (C2)  K1 K2 - K2 K1 = B2^T B1 - B1^T B2
//
// (C0) involves no free block and is necessary; (C1) and (C2) constrain the
// kernel blocks. Two solvers are provided: the closed form valid where
// gamma != 0, and a least-norm Newton solver that works from the blocks alone.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <string>

#include "superres/psf.hpp"
#include "superres/state_model.hpp"

namespace superres {

struct BlockDecomposition {
  Matrix2 a;  // support block
  Matrix2 b;  // support-to-kernel block
  Matrix2 k;  // kernel block
};

/// Throws ShapeError unless l is symmetric within 1e-14 (relative).
BlockDecomposition decompose_blocks(const Matrix4& l);
Matrix4 reassemble(const BlockDecomposition& d);

/// Coefficients on (sigma_0, sigma_1, sigma_2, sigma_3), v_a = tr(sigma_a X)/2.
struct PauliVector {
  std::array<double, 4> v{};

  /// Throws ShapeError unless x is Hermitian within 1e-14 (relative).
  static PauliVector from_hermitian(const Eigen::Matrix2cd& x);
  /// Real symmetric input; v2 is zero.
  static PauliVector from_symmetric(const Matrix2& x);

  Eigen::Matrix2cd to_hermitian() const;
  /// Throws ShapeError if v2 != 0 (the matrix would be complex).
  Matrix2 to_symmetric() const;
};

/// ||(A1 A2 - A2 A1) - (B2 B1^T - B1 B2^T)||_max.
double necessary_condition_residual(const BlockDecomposition& d1,
                                    const BlockDecomposition& d2);

/// Full residual breakdown of the commutation conditions for given K blocks.
struct ConditionResiduals {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  /// Entries (0,0), (0,1), (1,0), (1,1) of the (C1) mismatch.
  std::array<double, 4> c1_components{};
  /// Pauli components 1, 2, 3 of the (C2) mismatch (component 0 is
  /// identically zero). Component 2 is reported as |Im v2|, the only part a
  /// real antisymmetric mismatch can carry.
  std::array<double, 3> c2_components{};
};

ConditionResiduals condition_residuals(const BlockDecomposition& d1,
                                       const BlockDecomposition& d2,
                                       const Matrix2& k1, const Matrix2& k2);

enum class GaugeSource { kClosedForm, kLeastNorm };

const char* gauge_source_name(GaugeSource s) noexcept;

struct GaugePair {
  Matrix2 k1;
  Matrix2 k2;
  GaugeSource source = GaugeSource::kClosedForm;
  ConditionResiduals residuals;
  /// Newton iterations used (0 for the closed form).
  int iterations = 0;
};

/// Acceptance threshold for (C0), (C1), (C2) in the solvers.
inline constexpr double kGaugeResidualTolerance = 1e-8;

/// Solves (C1) and (C2) for real symmetric K1, K2.
///
/// The trace part of K1 is pinned (to k1_trace if given, else 0). The least-
/// norm solution of the linear (C1) system is the starting point for a
/// Gauss-Newton iteration on (C1)+(C2) with pseudo-inverse (minimum-norm)
/// steps. If the pinned trace admits no solution the trace is released and
/// the iteration repeated.
///
/// Throws NoSolution if (C0) fails (residual > 1e-8) or the final (C1)/(C2)
/// residual exceeds 1e-8.
GaugePair solve_gauge_least_norm(const BlockDecomposition& d1,
                                 const BlockDecomposition& d2,
                                 std::optional<double> k1_trace = std::nullopt);

/// The explicit pair
///   K1 = (2 gamma/(1-delta^2) - 2 kappa/gamma) s0 - (2 delta gamma/(1-delta^2)) s3
///   K2 = (eta3 eta4 / gamma) s1 + ((1+delta^2) gamma/(1-delta^2)) s3.
///
/// Throws DomainError if |gamma| <= 1e-12, SingularBasis if delta is within
/// 1e-12 of 1, and GaugeInvalid if the assembled SLDs fail to commute to 1e-10.
GaugePair closed_form_gauge(const OverlapSet& overlaps);

/// Replaces the kernel block. Throws ShapeError if k is not symmetric.
Matrix4 assemble_sld(const BlockDecomposition& d, const Matrix2& k);

struct EigenPair {
  double l1;
  double l2;
};

struct JointBasis {
  std::array<EigenPair, 4> eigenvalues;
  /// Column j is phi_j in e-basis components.
  Matrix4 vectors;
};

/// Golden-ratio mixing weight for the combined operator L1 + t L2.
inline constexpr double kMixingWeight = 0.6180339887498948482;
inline constexpr double kDegeneracyGap = 1e-9;

/// Common eigenbasis of two commuting real symmetric operators.
///
/// Columns are ordered by descending L1 eigenvalue, ties broken by descending
/// L2 eigenvalue; each column is signed so its largest-magnitude component is
/// positive.
///
/// Throws NotCommuting if ||[L1, L2]||_max > tol * max(||L1||, ||L2||) and
/// DegeneracyUnresolved if either operator is not diagonal within tol after
/// degenerate-subspace refinement.
JointBasis joint_eigenbasis(const Matrix4& l1p, const Matrix4& l2p,
                            double tol = 1e-10);

/// q_j(x) = sum_k phi_jk e_k(x), j in 1..4.
double joint_basis_wavefunction(const JointBasis& basis, const PsfSpec& psf,
                                const SceneParams& scene, int j, double x);

/// Structured text (JSON) of blocks, Pauli coefficients, residuals and the
/// joint basis for every solver that succeeds at this model.
std::string gauge_diagnostics_json(const QuantumModel& model);

}  // namespace superres
