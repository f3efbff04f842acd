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

// Measurement catalogue and the Fisher-information bookkeeping built on it.
//
// Three families of measurement are supported: pixelated direct imaging,
// Hermite-Gaussian mode sorting (SPADE) with a residual bucket, and projective
// measurements onto any orthonormal basis of the 4-dimensional e-space (with
// a fifth outcome for the complement of that space).

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "superres/psf.hpp"
#include "superres/sld_algebra.hpp"
#include "superres/state_model.hpp"

namespace superres {

struct DirectImaging {
  double pixel_width;
  double half_range;

  /// Pixel 0.005 sigma over [-8 sigma, 8 sigma].
  static DirectImaging defaults(const PsfSpec& psf);
};

struct Spade {
  double alignment;
  int q_max;

  /// Modes centred at the scene centroid, q_max = 20.
  static Spade aligned(const SceneParams& scene, int q_max = 20);
};

struct ProjectiveE {
  Matrix4 basis;  // orthonormal columns, e-basis components
};

using PovmSpec = std::variant<DirectImaging, Spade, ProjectiveE>;

/// Alignment must lie within this many PSF widths of the centroid.
inline constexpr double kSpadeAlignmentRange = 4.0;
/// Outcomes at or below this probability use the limit contribution.
inline constexpr double kZeroProbability = 1e-12;

/// Throws InvalidArgument if the measurement parameters are out of range.
void validate_povm(const PovmSpec& povm, const PsfSpec& psf);
std::size_t outcome_count(const PovmSpec& povm);

/// Interior bin edges of a direct-imaging measurement (tails excluded).
std::vector<double> direct_imaging_edges(const DirectImaging& di);

struct OutcomeDistribution {
  std::vector<double> probs;
  std::vector<double> dp1;  // d p / d theta1
  std::vector<double> dp2;  // d p / d theta2
};

/// Born-rule probabilities and their parameter derivatives at the scene.
///
/// Throws AlignmentOutOfRange for SPADE aligned more than 4 widths from the
/// centroid and QuadratureError on non-finite results.
OutcomeDistribution outcome_distribution(const PovmSpec& povm,
                                         const PsfSpec& psf,
                                         const SceneParams& scene,
                                         const QuantumModel& model);

/// Re <q|L_j rho L_k|q> per outcome of a projective measurement; the limit
/// of (dp_j dp_k)/p for outcomes whose probability vanishes. Empty for the
/// other measurement families.
std::vector<Matrix2> zero_probability_terms(const PovmSpec& povm,
                                            const QuantumModel& model);

/// Classical Fisher information sum_x dp_j dp_k / p over outcomes with
/// p > 1e-12; vanishing outcomes contribute limit_terms[x] when supplied.
Matrix2 classical_fim(const OutcomeDistribution& dist,
                      std::span<const Matrix2> limit_terms = {});

struct RegretReport {
  Matrix2 fim;
  Matrix2 qfi;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double c = 0.0;
  double irtr_slack = 0.0;
  /// Smallest eigenvalue of qfi - fim; >= -1e-8 for a valid measurement.
  double order_margin = 0.0;
};

/// Throws InvalidArgument if a QFI diagonal entry is not positive and
/// FimExceedsQfi if F_jj exceeds QFI_jj by more than 1e-8.
RegretReport regret_report(const Matrix2& fim, const QfiReport& qfi);

/// FIM and regrets of one measurement at the model's scene.
RegretReport evaluate_measurement(const PovmSpec& povm, const PsfSpec& psf,
                                  const QuantumModel& model);

/// Projective measurement on the common eigenbasis of a commuting gauge pair.
/// The closed form falls back to the least-norm solver when gamma ~ 0.
PovmSpec joint_optimal_povm(const QuantumModel& model,
                            GaugeSource source = GaugeSource::kClosedForm);

/// Projective measurement on the eigenbasis of the canonical SLD L_j.
PovmSpec sld_eigenbasis_povm(const QuantumModel& model, int j);

/// Outcome probabilities of a measurement whose effects were fixed at a
/// reference scene, evaluated at arbitrary parameter values.
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;
  virtual std::size_t outcomes() const = 0;
  virtual std::vector<double> probabilities(double theta1,
                                            double theta2) const = 0;
};

std::unique_ptr<OutcomeModel> make_outcome_model(const PovmSpec& povm,
                                                 const PsfSpec& psf,
                                                 const SceneParams& reference);

}  // namespace superres
