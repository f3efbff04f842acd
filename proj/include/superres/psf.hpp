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

// One-dimensional point-spread functions and the overlap integrals that
// characterize a pair of incoherent point sources imaged through them.
//
// The amplitude PSF psi(x) is real and L2-normalized. For two sources at
// X1 = theta1 - theta2/2 and X2 = theta1 + theta2/2 the model depends on
//
//   delta = int psi(x - X1) psi(x - X2) dx
//   kappa = int psi'(x)^2 dx
//   gamma = int psi'(x) psi(x - theta2) dx
//   beta  = int psi'(x) psi'(x - theta2) dx
//
// and the two normalization constants
//
//   eta3 = sqrt(kappa + beta - gamma^2 / (1 - delta))
//   eta4 = sqrt(kappa - beta - gamma^2 / (1 + delta)).

#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace superres {

struct GaussianPsf {
  double sigma;
};

/// Uniformly sampled, even, L2-normalized amplitude PSF.
class TabulatedPsf {
 public:
  /// Throws InvalidArgument if the grid is not uniform and increasing, the
  /// samples are not normalized to 1 within 1e-6 (trapezoid rule), or the
  /// profile is not even about x = 0.
  TabulatedPsf(std::vector<double> x, std::vector<double> values);

  /// Linear interpolation; zero outside the sampled grid.
  double value(double x) const noexcept;
  /// Linear interpolation of central differences taken on the grid.
  double derivative(double x) const noexcept;

  double step() const noexcept { return step_; }
  double x_min() const noexcept { return x_.front(); }
  double x_max() const noexcept { return x_.back(); }
  /// RMS width of |psi|^2; equals sigma for a Gaussian profile.
  double width() const noexcept { return width_; }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> values() const noexcept { return values_; }
  /// int_{-inf}^t psi(x)^2 dx for the interpolant, normalized to total mass 1.
  double intensity_cdf(double t) const noexcept;

 private:
  std::vector<double> x_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  std::vector<double> cumulative_;  // interpolant mass up to each node
  double step_ = 0.0;
  double width_ = 0.0;
};

class PsfSpec {
 public:
  static PsfSpec gaussian(double sigma);
  static PsfSpec tabulated(std::vector<double> x, std::vector<double> values);
  /// Two-column text file (x, psi(x)); '#' starts a comment.
  static PsfSpec load_tabulated(const std::filesystem::path& path);

  bool is_gaussian() const noexcept {
    return std::holds_alternative<GaussianPsf>(kind_);
  }
  /// Characteristic width: sigma for Gaussian, RMS width for tabulated.
  double sigma() const noexcept;

  const std::variant<GaussianPsf, TabulatedPsf>& kind() const noexcept {
    return kind_;
  }

 private:
  explicit PsfSpec(std::variant<GaussianPsf, TabulatedPsf> kind)
      : kind_(std::move(kind)) {}
  std::variant<GaussianPsf, TabulatedPsf> kind_;
};

class SceneParams {
 public:
  /// Throws InvalidArgument unless theta2 > 0 and both values are finite.
  SceneParams(double theta1, double theta2);

  double theta1() const noexcept { return theta1_; }
  double theta2() const noexcept { return theta2_; }
  double x1() const noexcept { return theta1_ - 0.5 * theta2_; }
  double x2() const noexcept { return theta1_ + 0.5 * theta2_; }

 private:
  double theta1_;
  double theta2_;
};

struct OverlapSet {
  double delta = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double eta3 = 0.0;
  double eta4 = 0.0;
};

enum class QuadratureRule { kTrapezoid, kGaussLegendre };

struct QuadratureConfig {
  double half_range = 12.0;  // in units of the PSF width
  int node_count = 2001;
  QuadratureRule rule = QuadratureRule::kTrapezoid;

  /// Throws InvalidArgument unless half_range > 0 and node_count is odd, >= 3.
  void validate() const;
};

/// Largest delta accepted before the e-basis is considered singular.
inline constexpr double kSingularDeltaMargin = 1e-12;
/// Radicands of eta3^2, eta4^2 in [-kRadicandTolerance, 0] are clamped to 0.
inline constexpr double kRadicandTolerance = 1e-12;

double psf_value(const PsfSpec& psf, double x) noexcept;
double psf_derivative(const PsfSpec& psf, double x) noexcept;

/// int_{-inf}^t psi(x)^2 dx.
double psf_intensity_cdf(const PsfSpec& psf, double t) noexcept;

/// int psi(x) psi(x - u) dx.
double psf_autocorrelation(const PsfSpec& psf, double u);
/// int psi'(x) psi(x - u) dx; equals gamma at u = theta2.
double psf_derivative_correlation(const PsfSpec& psf, double u);

/// Closed forms for the Gaussian PSF; tabulated PSFs go through quadrature
/// with the default QuadratureConfig.
///
/// Throws SingularBasis (a DomainError) if delta >= 1 - 1e-12 and DomainError
/// if either eta radicand is below -1e-12.
OverlapSet compute_overlaps(const PsfSpec& psf, double theta2);

/// Direct numerical evaluation of the four integrals. Independent of the
/// closed forms and used as their oracle.
OverlapSet compute_overlaps_quadrature(const PsfSpec& psf, double theta2,
                                       const QuadratureConfig& cfg = {});

/// Completes an OverlapSet from (delta, kappa, gamma, beta) with the eta
/// normalization constants, applying the same checks as compute_overlaps.
OverlapSet finish_overlaps(double delta, double kappa, double gamma,
                           double beta);

}  // namespace superres
