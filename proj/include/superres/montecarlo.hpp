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

// Photon-by-photon simulation of a fixed measurement, maximum-likelihood
// estimation of (theta1, theta2), and comparison of the estimator covariance
// with the Cramer-Rao bound (N F)^-1.

#include <cstdint>
#include <span>
#include <vector>

#include "superres/measurements.hpp"

namespace superres {

struct SearchBox {
  double theta1_lo;
  double theta1_hi;
  double theta2_lo;
  double theta2_hi;

  /// theta1 +- sigma, theta2 in [theta2 / 4, 7 theta2 / 4].
  static SearchBox around(const SceneParams& truth, const PsfSpec& psf);
  bool contains(double t1, double t2) const noexcept {
    return t1 >= theta1_lo && t1 <= theta1_hi && t2 >= theta2_lo &&
           t2 <= theta2_hi;
  }
};

struct TrialConfig {
  std::uint64_t photons = 100000;
  std::uint32_t trials = 500;
  std::uint64_t seed = 1;
  SearchBox box{};
  /// 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  /// Throws InvalidArgument if photons or trials is zero, the box does not
  /// contain the truth, or theta2_lo <= 0.
  void validate(const SceneParams& truth) const;
};

struct Estimate {
  double theta1;
  double theta2;
};

struct TrialResult {
  std::vector<Estimate> estimates;
  Matrix2 empirical_cov;
  Vector2 mean;
  Matrix2 crb;     // (N F)^-1
  Vector2 ratio;   // var_j / crb_jj
  double boundary_fraction = 0.0;
  /// More than 5% of estimates sit on the search-box boundary.
  bool boundary_warning = false;
};

/// Counter-based generator: output i of stream `seed` is a pure function of
/// (seed, i).
std::uint64_t counter_random(std::uint64_t seed, std::uint64_t counter) noexcept;
/// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept;
/// Seed of trial `index` derived from the run seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Multinomial draw of n outcomes by inverse-CDF sampling of each photon.
std::vector<std::uint64_t> sample_outcomes(std::span<const double> probs,
                                           std::uint64_t n, std::uint64_t seed);

/// Draws n photons from the measurement's Born-rule distribution at scene.
std::vector<std::uint64_t> sample_outcomes(const PovmSpec& povm,
                                           const PsfSpec& psf,
                                           const SceneParams& scene,
                                           std::uint64_t n, std::uint64_t seed);

/// Maximizes sum_x counts_x log p_x(theta) over the box: 21 x 21 grid, then
/// Nelder-Mead refinement to 1e-6 in theta.
///
/// Throws InvalidArgument on an empty count vector or size mismatch, and
/// Degenerate if the log-likelihood is flat over the box.
Estimate mle_fit(std::span<const std::uint64_t> counts,
                 const OutcomeModel& model, const SearchBox& box);

/// Throws InvalidArgument if fewer than 50 estimates. A singular F gives an
/// infinite bound and zero ratios.
TrialResult crb_comparison(std::vector<Estimate> estimates, const Matrix2& fim,
                           std::uint64_t photons, const SearchBox& box);

/// Full pipeline: T independent trials of N photons, fitted and compared with
/// the classical FIM of the measurement at the truth.
TrialResult run_trials(const PovmSpec& povm, const PsfSpec& psf,
                       const SceneParams& truth, const TrialConfig& cfg);

}  // namespace superres
