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
#include "superres/measurements.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "superres/errors.hpp"

namespace superres {
namespace {

// ---------------------------------------------------------------------------
// Direct imaging

// Smaller tail mass beyond an edge, int_{|t|}^inf psi^2; the PSF is even.
double small_tail(const PsfSpec& psf, double t) {
  if (!std::isfinite(t)) return 0.0;
  return psf_intensity_cdf(psf, -std::abs(t));
}

// Mass of [a, b] from the small tails at both edges, free of cancellation
// in either tail.
double bin_mass(double a, double b, double tail_a, double tail_b) {
  if (a >= 0.0) return tail_a - tail_b;
  if (b <= 0.0) return tail_b - tail_a;
  return 1.0 - tail_a - tail_b;
}

double intensity(const PsfSpec& psf, double t) {
  if (!std::isfinite(t)) return 0.0;
  const double v = psf_value(psf, t);
  return v * v;
}

OutcomeDistribution direct_distribution(const DirectImaging& di,
                                        const PsfSpec& psf, double theta1,
                                        double theta2, bool with_derivatives) {
  std::vector<double> edges = direct_imaging_edges(di);
  edges.insert(edges.begin(), -std::numeric_limits<double>::infinity());
  edges.push_back(std::numeric_limits<double>::infinity());
  const std::size_t n = edges.size() - 1;

  OutcomeDistribution d;
  d.probs.assign(n, 0.0);
  if (with_derivatives) {
    d.dp1.assign(n, 0.0);
    d.dp2.assign(n, 0.0);
  }
  const double xs[2] = {theta1 - 0.5 * theta2, theta1 + 0.5 * theta2};
  const double dx_dtheta2[2] = {-0.5, 0.5};
  for (int s = 0; s < 2; ++s) {
    const double x = xs[s];
    double tail_a = small_tail(psf, edges[0] - x);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = edges[i] - x;
      const double b = edges[i + 1] - x;
      const double tail_b = small_tail(psf, b);
      d.probs[i] += 0.5 * bin_mass(a, b, tail_a, tail_b);
      tail_a = tail_b;
      if (with_derivatives) {
        // d/dX int_a^b psi(x - X)^2 dx = psi(a - X)^2 - psi(b - X)^2
        const double dmass = intensity(psf, a) - intensity(psf, b);
        d.dp1[i] += 0.5 * dmass;
        d.dp2[i] += 0.5 * dx_dtheta2[s] * dmass;
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// SPADE

// Orthonormal Hermite functions h_0..h_n at xi (weight exp(-xi^2) absorbed).
std::vector<double> hermite_functions(int n, double xi) {
  std::vector<double> h(n + 1);
  h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (n >= 1) h[1] = std::numbers::sqrt2 * xi * h[0];
  for (int k = 1; k < n; ++k) {
    h[k + 1] = std::sqrt(2.0 / (k + 1)) * xi * h[k] -
               std::sqrt(static_cast<double>(k) / (k + 1)) * h[k - 1];
  }
  return h;
}

// Mode-sorting probabilities of one source displaced by d from the mode
// origin, plus d/dd. Gaussian PSF: Poisson law in Q = d^2 / (4 sigma^2).
void spade_single_source(const PsfSpec& psf, int q_max, double centre,
                         double x, std::vector<double>& p,
                         std::vector<double>& dp) {
  p.assign(q_max + 1, 0.0);
  dp.assign(q_max + 1, 0.0);
  const double sigma = psf.sigma();
  if (psf.is_gaussian()) {
    const double d = x - centre;
    const double q_par = d * d / (4.0 * sigma * sigma);
    const double dq = d / (2.0 * sigma * sigma);
    double prev = 0.0;
    double cur = std::exp(-q_par);
    for (int q = 0; q <= q_max; ++q) {
      if (q > 0) {
        prev = cur;
        cur = prev * q_par / q;
      }
      p[q] = cur;
      dp[q] = dq * ((q > 0 ? prev : 0.0) - cur);
    }
    return;
  }

  // Tabulated PSF: amplitudes <phi_q(. - centre) | psi(. - x)> by trapezoid
  // quadrature over the support of the shifted PSF.
  const auto& tab = std::get<TabulatedPsf>(psf.kind());
  const double h = 0.25 * tab.step();
  const auto nodes = static_cast<std::size_t>(
      std::ceil((tab.x_max() - tab.x_min()) / h)) + 1;
  const double scale = std::sqrt(std::numbers::sqrt2 * sigma);
  std::vector<double> amp(q_max + 1, 0.0);
  std::vector<double> damp(q_max + 1, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = std::min(tab.x_min() + h * static_cast<double>(i), tab.x_max());
    const double w = (i == 0 || i + 1 == nodes) ? 0.5 * h : h;
    const double xi = (t + x - centre) / (std::numbers::sqrt2 * sigma);
    const auto hf = hermite_functions(q_max, xi);
    const double f = tab.value(t);
    const double df = tab.derivative(t);
    for (int q = 0; q <= q_max; ++q) {
      amp[q] += w * hf[q] / scale * f;
      damp[q] -= w * hf[q] / scale * df;
    }
  }
  for (int q = 0; q <= q_max; ++q) {
    p[q] = amp[q] * amp[q];
    dp[q] = 2.0 * amp[q] * damp[q];
  }
}

OutcomeDistribution spade_distribution(const Spade& sp, const PsfSpec& psf,
                                       double theta1, double theta2,
                                       bool with_derivatives) {
  const std::size_t n = static_cast<std::size_t>(sp.q_max) + 2;
  OutcomeDistribution d;
  d.probs.assign(n, 0.0);
  d.dp1.assign(with_derivatives ? n : 0, 0.0);
  d.dp2.assign(with_derivatives ? n : 0, 0.0);
  const double xs[2] = {theta1 - 0.5 * theta2, theta1 + 0.5 * theta2};
  const double dx_dtheta2[2] = {-0.5, 0.5};
  std::vector<double> p;
  std::vector<double> dp;
  for (int s = 0; s < 2; ++s) {
    spade_single_source(psf, sp.q_max, sp.alignment, xs[s], p, dp);
    for (int q = 0; q <= sp.q_max; ++q) {
      d.probs[q] += 0.5 * p[q];
      if (with_derivatives) {
        d.dp1[q] += 0.5 * dp[q];
        d.dp2[q] += 0.5 * dx_dtheta2[s] * dp[q];
      }
    }
  }
  // Bucket outcome collects everything beyond q_max.
  double total = 0.0;
  double total1 = 0.0;
  double total2 = 0.0;
  for (int q = 0; q <= sp.q_max; ++q) {
    total += d.probs[q];
    if (with_derivatives) {
      total1 += d.dp1[q];
      total2 += d.dp2[q];
    }
  }
  d.probs.back() = std::max(1.0 - total, 0.0);
  if (with_derivatives) {
    d.dp1.back() = -total1;
    d.dp2.back() = -total2;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Projective

void check_orthonormal(const Matrix4& basis) {
  const double err = max_abs(Matrix4(basis.transpose() * basis - Matrix4::Identity()));
  if (!(err <= 1e-12)) {
    std::ostringstream msg;
    msg << "projective basis is not orthonormal (error " << err << ")";
    throw InvalidArgument(msg.str());
  }
}

void check_finite(const OutcomeDistribution& d) {
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    if (!std::isfinite(d.probs[i]) ||
        (!d.dp1.empty() && !std::isfinite(d.dp1[i] + d.dp2[i])))
      throw QuadratureError("outcome distribution has a non-finite entry");
  }
}

}  // namespace

DirectImaging DirectImaging::defaults(const PsfSpec& psf) {
  return {0.005 * psf.sigma(), 8.0 * psf.sigma()};
}

Spade Spade::aligned(const SceneParams& scene, int q_max) {
  return {scene.theta1(), q_max};
}

std::vector<double> direct_imaging_edges(const DirectImaging& di) {
  const double span = 2.0 * di.half_range;
  const auto bins = static_cast<std::size_t>(
      std::max(1.0, std::ceil(span / di.pixel_width - 1e-9)));
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i < bins; ++i)
    edges[i] = -di.half_range + di.pixel_width * static_cast<double>(i);
  edges.back() = di.half_range;
  return edges;
}

void validate_povm(const PovmSpec& povm, const PsfSpec& psf) {
  if (const auto* di = std::get_if<DirectImaging>(&povm)) {
    if (!(di->pixel_width > 0.0))
      throw InvalidArgument("direct imaging: pixel width must be positive");
    if (!(di->half_range >= 4.0 * psf.sigma() * (1.0 - 1e-12)))
      throw InvalidArgument("direct imaging: half range must be >= 4 sigma");
    if (2.0 * di->half_range / di->pixel_width > 1e7)
      throw InvalidArgument("direct imaging: too many pixels");
  } else if (const auto* sp = std::get_if<Spade>(&povm)) {
    if (sp->q_max < 2 || sp->q_max > 200)
      throw InvalidArgument("SPADE: q_max must be in [2, 200]");
    if (!std::isfinite(sp->alignment))
      throw InvalidArgument("SPADE: alignment must be finite");
  } else {
    check_orthonormal(std::get<ProjectiveE>(povm).basis);
  }
}

std::size_t outcome_count(const PovmSpec& povm) {
  if (const auto* di = std::get_if<DirectImaging>(&povm))
    return direct_imaging_edges(*di).size() + 1;
  if (const auto* sp = std::get_if<Spade>(&povm))
    return static_cast<std::size_t>(sp->q_max) + 2;
  return 5;
}

OutcomeDistribution outcome_distribution(const PovmSpec& povm,
                                         const PsfSpec& psf,
                                         const SceneParams& scene,
                                         const QuantumModel& model) {
  validate_povm(povm, psf);
  OutcomeDistribution d;
  if (const auto* di = std::get_if<DirectImaging>(&povm)) {
    d = direct_distribution(*di, psf, scene.theta1(), scene.theta2(), true);
  } else if (const auto* sp = std::get_if<Spade>(&povm)) {
    if (std::abs(sp->alignment - scene.theta1()) >
        kSpadeAlignmentRange * psf.sigma()) {
      std::ostringstream msg;
      msg << "SPADE alignment " << sp->alignment << " is more than "
          << kSpadeAlignmentRange << " widths from the centroid "
          << scene.theta1();
      throw AlignmentOutOfRange(msg.str());
    }
    d = spade_distribution(*sp, psf, scene.theta1(), scene.theta2(), true);
  } else {
    const Matrix4& v = std::get<ProjectiveE>(povm).basis;
    d.probs.assign(5, 0.0);
    d.dp1.assign(5, 0.0);
    d.dp2.assign(5, 0.0);
    double total = 0.0;
    for (int j = 0; j < 4; ++j) {
      const Eigen::Vector4d q = v.col(j);
      d.probs[j] = std::max(q.dot(model.rho * q), 0.0);
      d.dp1[j] = q.dot(model.drho1 * q);
      d.dp2[j] = q.dot(model.drho2 * q);
      total += d.probs[j];
    }
    // Complement of span{e1..e4}; rho and its derivatives live inside it.
    d.probs[4] = std::max(1.0 - total, 0.0);
    if (d.probs[4] <= 1e-14) d.probs[4] = 0.0;
    d.dp1[4] = -(d.dp1[0] + d.dp1[1] + d.dp1[2] + d.dp1[3]);
    d.dp2[4] = -(d.dp2[0] + d.dp2[1] + d.dp2[2] + d.dp2[3]);
  }
  for (double& p : d.probs) {
    if (p < 0.0 && p >= -1e-14) p = 0.0;
  }
  check_finite(d);
  return d;
}

std::vector<Matrix2> zero_probability_terms(const PovmSpec& povm,
                                            const QuantumModel& model) {
  const auto* proj = std::get_if<ProjectiveE>(&povm);
  if (proj == nullptr) return {};
  std::vector<Matrix2> terms(5, Matrix2::Zero());
  for (int x = 0; x < 4; ++x) {
    const Eigen::Vector4d q = proj->basis.col(x);
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        terms[x](j, k) = q.dot(model.sld(j + 1) * model.rho * model.sld(k + 1) * q);
      }
    }
    terms[x] = 0.5 * (terms[x] + terms[x].transpose()).eval();
  }
  return terms;
}

Matrix2 classical_fim(const OutcomeDistribution& dist,
                      std::span<const Matrix2> limit_terms) {
  if (!limit_terms.empty() && limit_terms.size() != dist.probs.size())
    throw InvalidArgument("limit terms must match the outcome count");
  Matrix2 f = Matrix2::Zero();
  for (std::size_t x = 0; x < dist.probs.size(); ++x) {
    const double p = dist.probs[x];
    if (p > kZeroProbability) {
      const Vector2 g(dist.dp1[x], dist.dp2[x]);
      f += g * g.transpose() / p;
    } else if (!limit_terms.empty()) {
      f += limit_terms[x];
    }
  }
  return f;
}

RegretReport regret_report(const Matrix2& fim, const QfiReport& qfi) {
  RegretReport r;
  r.fim = fim;
  r.qfi = qfi.qfi;
  r.c = qfi.c;
  double deltas[2];
  for (int j = 0; j < 2; ++j) {
    const double q = qfi.qfi(j, j);
    if (!(q > 0.0))
      throw InvalidArgument("QFI diagonal entries must be positive");
    const double gap = q - fim(j, j);
    if (gap < -1e-8) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "classical FIM exceeds QFI for parameter " << j + 1 << ": F = "
          << fim(j, j) << ", QFI = " << q;
      throw FimExceedsQfi(msg.str());
    }
    deltas[j] = std::sqrt(std::clamp(gap / q, 0.0, 1.0));
  }
  r.delta1 = deltas[0];
  r.delta2 = deltas[1];
  const double c = r.c;
  r.irtr_slack = r.delta1 * r.delta1 + r.delta2 * r.delta2 +
                 2.0 * std::sqrt(std::max(1.0 - c * c, 0.0)) * r.delta1 * r.delta2 -
                 c * c;
  const Matrix2 gap = qfi.qfi - fim;
  r.order_margin =
      Eigen::SelfAdjointEigenSolver<Matrix2>(0.5 * (gap + gap.transpose()))
          .eigenvalues()
          .minCoeff();
  return r;
}

RegretReport evaluate_measurement(const PovmSpec& povm, const PsfSpec& psf,
                                  const QuantumModel& model) {
  const OutcomeDistribution dist =
      outcome_distribution(povm, psf, model.scene, model);
  const std::vector<Matrix2> limits = zero_probability_terms(povm, model);
  return regret_report(classical_fim(dist, limits), qfi_matrix(model));
}

PovmSpec joint_optimal_povm(const QuantumModel& model, GaugeSource source) {
  const BlockDecomposition d1 = decompose_blocks(model.l1);
  const BlockDecomposition d2 = decompose_blocks(model.l2);
  GaugePair pair;
  if (source == GaugeSource::kClosedForm) {
    try {
      pair = closed_form_gauge(model.overlaps);
    } catch (const SingularBasis&) {
      throw;
    } catch (const DomainError&) {
      pair = solve_gauge_least_norm(d1, d2);
    }
  } else {
    pair = solve_gauge_least_norm(d1, d2);
  }
  const JointBasis basis =
      joint_eigenbasis(assemble_sld(d1, pair.k1), assemble_sld(d2, pair.k2));
  return ProjectiveE{basis.vectors};
}

PovmSpec sld_eigenbasis_povm(const QuantumModel& model, int j) {
  if (j != 1 && j != 2) throw InvalidArgument("SLD index must be 1 or 2");
  Eigen::SelfAdjointEigenSolver<Matrix4> es(model.sld(j));
  return ProjectiveE{es.eigenvectors()};
}

// ---------------------------------------------------------------------------
// Outcome models at arbitrary parameters

namespace {

class DirectImagingModel final : public OutcomeModel {
 public:
  DirectImagingModel(DirectImaging di, PsfSpec psf)
      : di_(di), psf_(std::move(psf)), n_(outcome_count(di_)) {}
  std::size_t outcomes() const override { return n_; }
  std::vector<double> probabilities(double t1, double t2) const override {
    return direct_distribution(di_, psf_, t1, t2, false).probs;
  }

 private:
  DirectImaging di_;
  PsfSpec psf_;
  std::size_t n_;
};

class SpadeModel final : public OutcomeModel {
 public:
  SpadeModel(Spade sp, PsfSpec psf) : sp_(sp), psf_(std::move(psf)) {}
  std::size_t outcomes() const override { return sp_.q_max + 2; }
  std::vector<double> probabilities(double t1, double t2) const override {
    return spade_distribution(sp_, psf_, t1, t2, false).probs;
  }

 private:
  Spade sp_;
  PsfSpec psf_;
};

// Basis vectors are fixed functions built at the reference scene; their
// overlaps with psi(x - X) reduce to PSF correlations at X - anchor.
class ProjectiveModel final : public OutcomeModel {
 public:
  ProjectiveModel(const Matrix4& basis, const PsfSpec& psf,
                  const SceneParams& reference)
      : psf_(psf), anchors_{} {
    const EBasis e(psf, reference);
    weights_ = basis.transpose() * e.coefficients();
    anchors_ = e.anchors();
  }
  std::size_t outcomes() const override { return 5; }
  std::vector<double> probabilities(double t1, double t2) const override {
    std::vector<double> p(5, 0.0);
    for (const double x : {t1 - 0.5 * t2, t1 + 0.5 * t2}) {
      Eigen::Vector4d atom;
      atom(0) = psf_autocorrelation(psf_, x - anchors_[0]);
      atom(1) = psf_autocorrelation(psf_, x - anchors_[1]);
      atom(2) = -psf_derivative_correlation(psf_, x - anchors_[2]);
      atom(3) = -psf_derivative_correlation(psf_, x - anchors_[3]);
      const Eigen::Vector4d amp = weights_ * atom;
      for (int j = 0; j < 4; ++j) p[j] += 0.5 * amp(j) * amp(j);
    }
    p[4] = std::max(1.0 - (p[0] + p[1] + p[2] + p[3]), 0.0);
    return p;
  }

 private:
  PsfSpec psf_;
  Matrix4 weights_;
  std::array<double, 4> anchors_;
};

}  // namespace

std::unique_ptr<OutcomeModel> make_outcome_model(const PovmSpec& povm,
                                                 const PsfSpec& psf,
                                                 const SceneParams& reference) {
  validate_povm(povm, psf);
  if (const auto* di = std::get_if<DirectImaging>(&povm))
    return std::make_unique<DirectImagingModel>(*di, psf);
  if (const auto* sp = std::get_if<Spade>(&povm))
    return std::make_unique<SpadeModel>(*sp, psf);
  return std::make_unique<ProjectiveModel>(std::get<ProjectiveE>(povm).basis,
                                           psf, reference);
}

}  // namespace superres
