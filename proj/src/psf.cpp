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
#include "superres/psf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "quadrature.hpp"
#include "superres/errors.hpp"

namespace superres {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kSingularBasis: return "SingularBasis";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kNoSolution: return "NoSolution";
    case ErrorCode::kGaugeInvalid: return "GaugeInvalid";
    case ErrorCode::kNotCommuting: return "NotCommuting";
    case ErrorCode::kDegeneracyUnresolved: return "DegeneracyUnresolved";
    case ErrorCode::kAlignmentOutOfRange: return "AlignmentOutOfRange";
    case ErrorCode::kQuadrature: return "QuadratureError";
    case ErrorCode::kFimExceedsQfi: return "FimExceedsQfi";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// TabulatedPsf

TabulatedPsf::TabulatedPsf(std::vector<double> x, std::vector<double> values)
    : x_(std::move(x)), values_(std::move(values)) {
  const std::size_t n = x_.size();
  if (n != values_.size())
    throw InvalidArgument("tabulated PSF: x and value columns differ in length");
  if (n < 3) throw InvalidArgument("tabulated PSF: need at least 3 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(values_[i]))
      throw InvalidArgument("tabulated PSF: non-finite sample");
  }
  step_ = (x_.back() - x_.front()) / static_cast<double>(n - 1);
  if (!(step_ > 0.0))
    throw InvalidArgument("tabulated PSF: x must be strictly increasing");
  for (std::size_t i = 1; i < n; ++i) {
    const double expected = x_.front() + step_ * static_cast<double>(i);
    if (x_[i] <= x_[i - 1] || std::abs(x_[i] - expected) > 1e-6 * step_)
      throw InvalidArgument("tabulated PSF: grid must be uniform and increasing");
  }

  double norm = 0.0;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wt = (i == 0 || i == n - 1) ? 0.5 * step_ : step_;
    const double p = values_[i] * values_[i];
    norm += wt * p;
    mean += wt * p * x_[i];
    second += wt * p * x_[i] * x_[i];
  }
  if (std::abs(norm - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "tabulated PSF: L2 norm^2 is " << norm << ", expected 1 within 1e-6";
    throw InvalidArgument(msg.str());
  }
  width_ = std::sqrt(std::max(second - mean * mean, 0.0));
  if (!(width_ > 0.0)) throw InvalidArgument("tabulated PSF: zero width");

  slopes_.resize(n);
  slopes_.front() = (values_[1] - values_[0]) / step_;
  slopes_.back() = (values_[n - 1] - values_[n - 2]) / step_;
  for (std::size_t i = 1; i + 1 < n; ++i)
    slopes_[i] = (values_[i + 1] - values_[i - 1]) / (2.0 * step_);

  cumulative_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double v0 = values_[i - 1];
    const double dv = values_[i] - v0;
    cumulative_[i] =
        cumulative_[i - 1] + step_ * (v0 * v0 + v0 * dv + dv * dv / 3.0);
  }

  const double peak = *std::max_element(
      values_.begin(), values_.end(),
      [](double a, double b) { return std::abs(a) < std::abs(b); });
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(values_[i] - value(-x_[i])) > 1e-6 * std::abs(peak))
      throw InvalidArgument("tabulated PSF: profile must be even about x = 0");
  }
}

namespace {

double interpolate(std::span<const double> samples, double x0, double step,
                   double x) noexcept {
  const double s = (x - x0) / step;
  const auto last = static_cast<double>(samples.size() - 1);
  if (!(s >= 0.0) || s > last) return 0.0;
  const auto i = static_cast<std::size_t>(std::min(std::floor(s), last - 1.0));
  const double t = s - static_cast<double>(i);
  return (1.0 - t) * samples[i] + t * samples[i + 1];
}

}  // namespace

double TabulatedPsf::value(double x) const noexcept {
  return interpolate(values_, x_.front(), step_, x);
}

double TabulatedPsf::derivative(double x) const noexcept {
  return interpolate(slopes_, x_.front(), step_, x);
}

double TabulatedPsf::intensity_cdf(double t) const noexcept {
  const double total = cumulative_.back();
  const double s = (t - x_.front()) / step_;
  const auto last = static_cast<double>(x_.size() - 1);
  if (!(s > 0.0)) return 0.0;
  if (s >= last) return 1.0;
  const auto i = static_cast<std::size_t>(std::floor(s));
  const double u = s - static_cast<double>(i);
  const double v0 = values_[i];
  const double dv = values_[i + 1] - v0;
  const double partial =
      step_ * (v0 * v0 * u + v0 * dv * u * u + dv * dv * u * u * u / 3.0);
  return (cumulative_[i] + partial) / total;
}

// ---------------------------------------------------------------------------
// PsfSpec

PsfSpec PsfSpec::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("Gaussian PSF: sigma must be positive and finite");
  return PsfSpec(GaussianPsf{sigma});
}

PsfSpec PsfSpec::tabulated(std::vector<double> x, std::vector<double> values) {
  return PsfSpec(TabulatedPsf(std::move(x), std::move(values)));
}

PsfSpec PsfSpec::load_tabulated(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PSF table '" + path.string() + "'");
  std::vector<double> xs;
  std::vector<double> vs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    double x = 0.0;
    double v = 0.0;
    if (!(fields >> x)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) +
                            ": expected two numeric columns");
    }
    std::string extra;
    if (!(fields >> v) || (fields >> extra))
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) +
                            ": expected two numeric columns");
    xs.push_back(x);
    vs.push_back(v);
  }
  return tabulated(std::move(xs), std::move(vs));
}

double PsfSpec::sigma() const noexcept {
  if (const auto* g = std::get_if<GaussianPsf>(&kind_)) return g->sigma;
  return std::get<TabulatedPsf>(kind_).width();
}

SceneParams::SceneParams(double theta1, double theta2)
    : theta1_(theta1), theta2_(theta2) {
  if (!std::isfinite(theta1) || !std::isfinite(theta2))
    throw InvalidArgument("scene parameters must be finite");
  if (!(theta2 > 0.0))
    throw InvalidArgument("separation theta2 must be positive");
}

void QuadratureConfig::validate() const {
  if (!(half_range > 0.0))
    throw InvalidArgument("quadrature half_range must be positive");
  if (node_count < 3 || node_count % 2 == 0)
    throw InvalidArgument("quadrature node_count must be odd and >= 3");
}

// ---------------------------------------------------------------------------
// Point evaluation

double psf_value(const PsfSpec& psf, double x) noexcept {
  if (const auto* g = std::get_if<GaussianPsf>(&psf.kind())) {
    const double s2 = g->sigma * g->sigma;
    return std::pow(2.0 * std::numbers::pi * s2, -0.25) *
           std::exp(-x * x / (4.0 * s2));
  }
  return std::get<TabulatedPsf>(psf.kind()).value(x);
}

double psf_derivative(const PsfSpec& psf, double x) noexcept {
  if (const auto* g = std::get_if<GaussianPsf>(&psf.kind())) {
    return -x / (2.0 * g->sigma * g->sigma) * psf_value(psf, x);
  }
  return std::get<TabulatedPsf>(psf.kind()).derivative(x);
}

double psf_intensity_cdf(const PsfSpec& psf, double t) noexcept {
  if (const auto* g = std::get_if<GaussianPsf>(&psf.kind())) {
    return 0.5 * std::erfc(-t / (g->sigma * std::numbers::sqrt2));
  }
  return std::get<TabulatedPsf>(psf.kind()).intensity_cdf(t);
}

namespace {

// Nodes covering both psi(x) and psi(x - shift) out to half_range widths.
detail::QuadratureNodes shifted_nodes(const PsfSpec& psf, double shift,
                                      const QuadratureConfig& cfg) {
  const double centre = 0.5 * shift;
  const double half = cfg.half_range * psf.sigma() + 0.5 * std::abs(shift);
  return detail::make_quadrature(cfg, centre - half, centre + half);
}

}  // namespace

double psf_autocorrelation(const PsfSpec& psf, double u) {
  if (const auto* g = std::get_if<GaussianPsf>(&psf.kind())) {
    return std::exp(-u * u / (8.0 * g->sigma * g->sigma));
  }
  const auto q = shifted_nodes(psf, u, QuadratureConfig{});
  return q.integrate(
      [&](double x) { return psf_value(psf, x) * psf_value(psf, x - u); });
}

double psf_derivative_correlation(const PsfSpec& psf, double u) {
  if (const auto* g = std::get_if<GaussianPsf>(&psf.kind())) {
    const double s2 = g->sigma * g->sigma;
    return -u / (4.0 * s2) * std::exp(-u * u / (8.0 * s2));
  }
  const auto q = shifted_nodes(psf, u, QuadratureConfig{});
  return q.integrate(
      [&](double x) { return psf_derivative(psf, x) * psf_value(psf, x - u); });
}

// ---------------------------------------------------------------------------
// Overlaps

OverlapSet finish_overlaps(double delta, double kappa, double gamma,
                           double beta) {
  if (!std::isfinite(delta) || !std::isfinite(kappa) || !std::isfinite(gamma) ||
      !std::isfinite(beta))
    throw DomainError("overlap integrals are not finite");
  if (std::abs(delta) >= 1.0 - kSingularDeltaMargin) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "delta = " << delta
        << " is within 1e-12 of 1; the e-basis is singular (sources too close)";
    throw SingularBasis(msg.str());
  }
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");

  auto root = [](double radicand, const char* name) {
    if (radicand < -kRadicandTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << name << " radicand " << radicand
          << " is negative; inconsistent PSF data";
      throw DomainError(msg.str());
    }
    return std::sqrt(std::max(radicand, 0.0));
  };

  OverlapSet ov;
  ov.delta = delta;
  ov.kappa = kappa;
  ov.gamma = gamma;
  ov.beta = beta;
  ov.eta3 = root(kappa + beta - gamma * gamma / (1.0 - delta), "eta3");
  ov.eta4 = root(kappa - beta - gamma * gamma / (1.0 + delta), "eta4");
  return ov;
}

OverlapSet compute_overlaps(const PsfSpec& psf, double theta2) {
  if (!(theta2 > 0.0) || !std::isfinite(theta2))
    throw InvalidArgument("theta2 must be positive and finite");
  const auto* g = std::get_if<GaussianPsf>(&psf.kind());
  if (g == nullptr) return compute_overlaps_quadrature(psf, theta2);

  const double s2 = g->sigma * g->sigma;
  const double t2 = theta2 * theta2;
  const double delta = std::exp(-t2 / (8.0 * s2));
  const double kappa = 1.0 / (4.0 * s2);
  const double gamma = -theta2 / (4.0 * s2) * delta;
  const double beta = (4.0 * s2 - t2) / (16.0 * s2 * s2) * delta;
  return finish_overlaps(delta, kappa, gamma, beta);
}

OverlapSet compute_overlaps_quadrature(const PsfSpec& psf, double theta2,
                                       const QuadratureConfig& cfg) {
  if (!(theta2 > 0.0) || !std::isfinite(theta2))
    throw InvalidArgument("theta2 must be positive and finite");
  const auto q = shifted_nodes(psf, theta2, cfg);

  double delta = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    const double x = q.x[i];
    const double w = q.w[i];
    const double f = psf_value(psf, x);
    const double df = psf_derivative(psf, x);
    const double f_shift = psf_value(psf, x - theta2);
    const double df_shift = psf_derivative(psf, x - theta2);
    delta += w * f * f_shift;
    kappa += w * df * df;
    gamma += w * df * f_shift;
    beta += w * df * df_shift;
  }
  if (!std::isfinite(delta + kappa + gamma + beta))
    throw QuadratureError("overlap quadrature produced a non-finite value");
  return finish_overlaps(delta, kappa, gamma, beta);
}

}  // namespace superres
