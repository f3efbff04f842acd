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
#include "superres/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "superres/errors.hpp"

namespace superres {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t counter_random(std::uint64_t seed, std::uint64_t counter) noexcept {
  return mix64(mix64(seed + kGolden) + (counter + 1) * kGolden);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
  return static_cast<double>(counter_random(seed, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + kGolden));
}

SearchBox SearchBox::around(const SceneParams& truth, const PsfSpec& psf) {
  const double s = psf.sigma();
  return {truth.theta1() - s, truth.theta1() + s, 0.25 * truth.theta2(),
          1.75 * truth.theta2()};
}

void TrialConfig::validate(const SceneParams& truth) const {
  if (photons == 0) throw InvalidArgument("photons per trial must be >= 1");
  if (trials == 0) throw InvalidArgument("trial count must be >= 1");
  if (!(box.theta2_lo > 0.0))
    throw InvalidArgument("search box lower separation must be positive");
  if (!(box.theta1_lo < box.theta1_hi) || !(box.theta2_lo < box.theta2_hi))
    throw InvalidArgument("search box is empty");
  if (!box.contains(truth.theta1(), truth.theta2()))
    throw InvalidArgument("search box must contain the true scene");
}

std::vector<std::uint64_t> sample_outcomes(std::span<const double> probs,
                                           std::uint64_t n, std::uint64_t seed) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += std::max(probs[i], 0.0);
    cdf[i] = acc;
  }
  std::vector<std::uint64_t> counts(probs.size(), 0);
  if (n == 0) return counts;
  if (!(acc > 0.0)) throw InvalidArgument("probabilities sum to zero");
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = counter_uniform(seed, i) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

std::vector<std::uint64_t> sample_outcomes(const PovmSpec& povm,
                                           const PsfSpec& psf,
                                           const SceneParams& scene,
                                           std::uint64_t n, std::uint64_t seed) {
  const auto model = make_outcome_model(povm, psf, scene);
  return sample_outcomes(model->probabilities(scene.theta1(), scene.theta2()), n,
                         seed);
}

// ---------------------------------------------------------------------------
// Maximum likelihood

namespace {

struct Point {
  double t1;
  double t2;
  double value;  // negative log-likelihood
};

class NegLogLikelihood {
 public:
  NegLogLikelihood(std::span<const std::uint64_t> counts,
                   const OutcomeModel& model, const SearchBox& box)
      : counts_(counts), model_(model), box_(box) {}

  double operator()(double t1, double t2) const {
    if (!box_.contains(t1, t2)) return std::numeric_limits<double>::infinity();
    const std::vector<double> p = model_.probabilities(t1, t2);
    double nll = 0.0;
    for (std::size_t x = 0; x < counts_.size(); ++x) {
      if (counts_[x] == 0) continue;
      nll -= static_cast<double>(counts_[x]) * std::log(std::max(p[x], 1e-300));
    }
    return nll;
  }

 private:
  std::span<const std::uint64_t> counts_;
  const OutcomeModel& model_;
  const SearchBox& box_;
};

// Nelder-Mead with standard coefficients; stops once every vertex is within
// tol of the best one in both coordinates.
Point nelder_mead(const NegLogLikelihood& f, Point start, double step1,
                  double step2, double tol) {
  std::array<Point, 3> s{start,
                         Point{start.t1 + step1, start.t2, 0.0},
                         Point{start.t1, start.t2 + step2, 0.0}};
  s[1].value = f(s[1].t1, s[1].t2);
  s[2].value = f(s[2].t1, s[2].t2);
  auto eval = [&](double a, double b) { return Point{a, b, f(a, b)}; };

  for (int it = 0; it < 5000; ++it) {
    std::sort(s.begin(), s.end(),
              [](const Point& a, const Point& b) { return a.value < b.value; });
    const double spread = std::max({std::abs(s[1].t1 - s[0].t1), std::abs(s[2].t1 - s[0].t1),
                                    std::abs(s[1].t2 - s[0].t2), std::abs(s[2].t2 - s[0].t2)});
    if (spread < tol) break;

    const double c1 = 0.5 * (s[0].t1 + s[1].t1);
    const double c2 = 0.5 * (s[0].t2 + s[1].t2);
    const Point r = eval(2.0 * c1 - s[2].t1, 2.0 * c2 - s[2].t2);
    if (r.value < s[0].value) {
      const Point e = eval(3.0 * c1 - 2.0 * s[2].t1, 3.0 * c2 - 2.0 * s[2].t2);
      s[2] = e.value < r.value ? e : r;
      continue;
    }
    if (r.value < s[1].value) {
      s[2] = r;
      continue;
    }
    const bool outside = r.value < s[2].value;
    const Point k = outside ? eval(0.5 * (c1 + r.t1), 0.5 * (c2 + r.t2))
                            : eval(0.5 * (c1 + s[2].t1), 0.5 * (c2 + s[2].t2));
    if (k.value < std::min(r.value, s[2].value)) {
      s[2] = k;
      continue;
    }
    for (int i = 1; i < 3; ++i)
      s[i] = eval(0.5 * (s[0].t1 + s[i].t1), 0.5 * (s[0].t2 + s[i].t2));
  }
  return *std::min_element(s.begin(), s.end(), [](const Point& a, const Point& b) {
    return a.value < b.value;
  });
}

}  // namespace

Estimate mle_fit(std::span<const std::uint64_t> counts, const OutcomeModel& model,
                 const SearchBox& box) {
  if (counts.size() != model.outcomes())
    throw InvalidArgument("count vector does not match the outcome count");
  if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == 0)
    throw InvalidArgument("no photons recorded");

  const NegLogLikelihood f(counts, model, box);
  constexpr int kGrid = 21;
  const double h1 = (box.theta1_hi - box.theta1_lo) / (kGrid - 1);
  const double h2 = (box.theta2_hi - box.theta2_lo) / (kGrid - 1);
  Point best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double t1 = i == kGrid - 1 ? box.theta1_hi : box.theta1_lo + h1 * i;
      const double t2 = j == kGrid - 1 ? box.theta2_hi : box.theta2_lo + h2 * j;
      const double v = f(t1, t2);
      if (v < best.value) best = {t1, t2, v};
      worst = std::max(worst, v);
    }
  }
  if (!(worst - best.value > 1e-12 * (1.0 + std::abs(best.value))))
    throw Degenerate("likelihood is flat over the search box");

  // Step inward from the boundary so the initial simplex is feasible.
  const double s1 = best.t1 + 0.5 * h1 <= box.theta1_hi ? 0.5 * h1 : -0.5 * h1;
  const double s2 = best.t2 + 0.5 * h2 <= box.theta2_hi ? 0.5 * h2 : -0.5 * h2;
  const Point p = nelder_mead(f, best, s1, s2, 1e-6);
  return {p.t1, p.t2};
}

TrialResult crb_comparison(std::vector<Estimate> estimates, const Matrix2& fim,
                           std::uint64_t photons, const SearchBox& box) {
  const std::size_t t = estimates.size();
  if (t < 50) throw InvalidArgument("CRB comparison needs at least 50 trials");
  if (photons == 0) throw InvalidArgument("photons per trial must be >= 1");

  TrialResult r;
  r.mean.setZero();
  for (const Estimate& e : estimates) r.mean += Vector2(e.theta1, e.theta2);
  r.mean /= static_cast<double>(t);
  r.empirical_cov.setZero();
  std::size_t on_boundary = 0;
  const double tol1 = 1e-3 * (box.theta1_hi - box.theta1_lo);
  const double tol2 = 1e-3 * (box.theta2_hi - box.theta2_lo);
  for (const Estimate& e : estimates) {
    const Vector2 d = Vector2(e.theta1, e.theta2) - r.mean;
    r.empirical_cov += d * d.transpose();
    if (e.theta1 - box.theta1_lo < tol1 || box.theta1_hi - e.theta1 < tol1 ||
        e.theta2 - box.theta2_lo < tol2 || box.theta2_hi - e.theta2 < tol2)
      ++on_boundary;
  }
  r.empirical_cov /= static_cast<double>(t - 1);
  r.boundary_fraction = static_cast<double>(on_boundary) / static_cast<double>(t);
  r.boundary_warning = r.boundary_fraction > 0.05;

  const Matrix2 nf = static_cast<double>(photons) * fim;
  const double det = nf.determinant();
  if (std::abs(det) <= 1e-14 * std::max(nf.cwiseAbs().maxCoeff(), 1e-300) *
                           std::max(nf.cwiseAbs().maxCoeff(), 1e-300)) {
    // Singular information: the bound is infinite for some combination.
    r.crb.setConstant(std::numeric_limits<double>::infinity());
    r.ratio.setZero();
  } else {
    r.crb = nf.inverse();
    r.ratio = r.empirical_cov.diagonal().cwiseQuotient(r.crb.diagonal());
  }
  r.estimates = std::move(estimates);
  return r;
}

TrialResult run_trials(const PovmSpec& povm, const PsfSpec& psf,
                       const SceneParams& truth, const TrialConfig& cfg) {
  cfg.validate(truth);
  const QuantumModel model = build_model(psf, truth);
  const OutcomeDistribution dist = outcome_distribution(povm, psf, truth, model);
  const Matrix2 fim = classical_fim(dist, zero_probability_terms(povm, model));
  const auto outcome_model = make_outcome_model(povm, psf, truth);
  const std::vector<double> probs =
      outcome_model->probabilities(truth.theta1(), truth.theta2());

  std::vector<Estimate> estimates(cfg.trials);
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::uint32_t i = next++; i < cfg.trials; i = next++) {
      try {
        const auto counts = sample_outcomes(probs, cfg.photons, trial_seed(cfg.seed, i));
        estimates[i] = mle_fit(counts, *outcome_model, cfg.box);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.trials;
      }
    }
  };
  unsigned threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  threads = std::clamp(threads, 1u, std::max(cfg.trials, 1u));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return crb_comparison(std::move(estimates), fim, cfg.photons, cfg.box);
}

}  // namespace superres
