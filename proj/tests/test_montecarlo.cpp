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
#include <numeric>
#include <vector>

#include "superres/errors.hpp"
#include "superres/montecarlo.hpp"

namespace sr = superres;

namespace {

const sr::PsfSpec kPsf = sr::PsfSpec::gaussian(1.0);
const sr::SceneParams kTruth(0.0, 2.0);

sr::TrialConfig config(std::uint64_t photons, std::uint32_t trials, std::uint64_t seed) {
  sr::TrialConfig cfg;
  cfg.photons = photons;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.box = sr::SearchBox::around(kTruth, kPsf);
  return cfg;
}

}  // namespace

TEST_CASE("counter generator is a pure function of seed and counter") {
  CHECK(sr::counter_random(7, 3) == sr::counter_random(7, 3));
  CHECK(sr::counter_random(7, 3) != sr::counter_random(7, 4));
  CHECK(sr::counter_random(7, 3) != sr::counter_random(8, 3));
  CHECK(sr::trial_seed(1, 0) != sr::trial_seed(1, 1));
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = sr::counter_uniform(11, i);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(std::abs(mean / 100000 - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST_CASE("sampling") {
  const std::vector<double> probs{0.2, 0.0, 0.5, 0.3};
  const auto none = sr::sample_outcomes(probs, 0, 1);
  CHECK(none == std::vector<std::uint64_t>(4, 0));
  CHECK(sr::sample_outcomes(probs, 1000, 5) == sr::sample_outcomes(probs, 1000, 5));

  const auto m = sr::build_model(kPsf, kTruth);
  const sr::PovmSpec povm = sr::joint_optimal_povm(m);
  const auto dist = sr::outcome_distribution(povm, kPsf, kTruth, m);
  const std::uint64_t n = 1000000;
  const auto counts = sr::sample_outcomes(povm, kPsf, kTruth, n, 99);
  CHECK(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == n);
  for (std::size_t x = 0; x < counts.size(); ++x) {
    const double p = dist.probs[x];
    const double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(static_cast<double>(counts[x]) / n - p) <= 4.0 * se + 1e-15);
  }
  CHECK(counts[4] == 0);
}

TEST_CASE("maximum likelihood on expected counts recovers the truth") {
  const auto m = sr::build_model(kPsf, kTruth);
  const std::vector<sr::PovmSpec> povms{sr::joint_optimal_povm(m), sr::DirectImaging{0.05, 8.0}};
  for (const auto& povm : povms) {
    const auto model = sr::make_outcome_model(povm, kPsf, kTruth);
    const auto p = model->probabilities(0.0, 2.0);
    std::vector<std::uint64_t> counts(p.size());
    for (std::size_t x = 0; x < p.size(); ++x)
      counts[x] = static_cast<std::uint64_t>(std::llround(p[x] * 1e12));
    const auto est = sr::mle_fit(counts, *model, sr::SearchBox::around(kTruth, kPsf));
    CHECK(std::abs(est.theta1) <= 1e-3);
    CHECK(std::abs(est.theta2 - 2.0) <= 1e-3);
  }
}

TEST_CASE("maximum likelihood input validation") {
  const auto model = sr::make_outcome_model(sr::Spade{0.0, 4}, kPsf, kTruth);
  const auto box = sr::SearchBox::around(kTruth, kPsf);
  CHECK_THROWS_AS(sr::mle_fit(std::vector<std::uint64_t>(6, 0), *model, box),
                  sr::InvalidArgument);
  CHECK_THROWS_AS(sr::mle_fit(std::vector<std::uint64_t>(3, 1), *model, box),
                  sr::InvalidArgument);

  class Constant final : public sr::OutcomeModel {
   public:
    std::size_t outcomes() const override { return 1; }
    std::vector<double> probabilities(double, double) const override { return {1.0}; }
  };
  CHECK_THROWS_AS(sr::mle_fit(std::vector<std::uint64_t>{100}, Constant{}, box), sr::Degenerate);
}

TEST_CASE("trial configuration validation") {
  auto cfg = config(100, 0, 1);
  CHECK_THROWS_AS(cfg.validate(kTruth), sr::InvalidArgument);
  cfg = config(0, 10, 1);
  CHECK_THROWS_AS(cfg.validate(kTruth), sr::InvalidArgument);
  cfg = config(100, 10, 1);
  cfg.box.theta2_hi = 1.5;
  CHECK_THROWS_AS(cfg.validate(kTruth), sr::InvalidArgument);
  cfg = config(100, 10, 1);
  cfg.box.theta2_lo = 0.0;
  CHECK_THROWS_AS(cfg.validate(kTruth), sr::InvalidArgument);
  CHECK_THROWS_AS(sr::crb_comparison(std::vector<sr::Estimate>(49, {0.0, 2.0}),
                                     sr::Matrix2::Identity(), 10, cfg.box),
                  sr::InvalidArgument);
}

TEST_CASE("noiseless estimates have zero covariance") {
  const auto box = sr::SearchBox::around(kTruth, kPsf);
  sr::Matrix2 f;
  f << 0.6, 0.0, 0.0, 0.25;
  const auto r = sr::crb_comparison(std::vector<sr::Estimate>(60, {0.0, 2.0}), f, 1000, box);
  CHECK(r.empirical_cov == sr::Matrix2::Zero());
  CHECK(r.mean(1) == 2.0);
  CHECK(r.crb(0, 0) == doctest::Approx(1.0 / 600.0));
  CHECK_FALSE(r.boundary_warning);

  std::vector<sr::Estimate> edge(60, {0.0, 2.0});
  for (int i = 0; i < 10; ++i) edge[i].theta2 = box.theta2_hi;
  CHECK(sr::crb_comparison(edge, f, 1000, box).boundary_warning);
}

TEST_CASE("joint measurement estimator reaches the quantum bound") {
  const auto m = sr::build_model(kPsf, kTruth);
  const auto q = sr::qfi_matrix(m);
  const auto r = sr::run_trials(sr::joint_optimal_povm(m), kPsf, kTruth, config(100000, 500, 1));
  const double ratio1 = r.empirical_cov(0, 0) * 1e5 * q.qfi(0, 0);
  const double ratio2 = r.empirical_cov(1, 1) * 1e5 * q.qfi(1, 1);
  CHECK(ratio1 >= 0.85);
  CHECK(ratio1 <= 1.25);
  CHECK(ratio2 >= 0.85);
  CHECK(ratio2 <= 1.25);
  CHECK(r.ratio(0) == doctest::Approx(ratio1).epsilon(1e-8));
  CHECK_FALSE(r.boundary_warning);
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(r.empirical_cov(j, j) / 500.0);
    CHECK(std::abs(r.mean(j) - (j == 0 ? 0.0 : 2.0)) <= 3.0 * se);
  }
}

TEST_CASE("trials are deterministic and independent of thread count") {
  const auto m = sr::build_model(kPsf, kTruth);
  const auto povm = sr::joint_optimal_povm(m);
  auto cfg = config(2000, 60, 42);
  cfg.threads = 1;
  const auto a = sr::run_trials(povm, kPsf, kTruth, cfg);
  cfg.threads = 4;
  const auto b = sr::run_trials(povm, kPsf, kTruth, cfg);
  REQUIRE(a.estimates.size() == b.estimates.size());
  for (std::size_t i = 0; i < a.estimates.size(); ++i) {
    CHECK(a.estimates[i].theta1 == b.estimates[i].theta1);
    CHECK(a.estimates[i].theta2 == b.estimates[i].theta2);
  }
  cfg.seed = 43;
  const auto c = sr::run_trials(povm, kPsf, kTruth, cfg);
  CHECK(c.estimates[0].theta2 != a.estimates[0].theta2);
}

TEST_CASE("direct imaging estimator is unbiased but misses the quantum bound") {
  const auto m = sr::build_model(kPsf, kTruth);
  const auto q = sr::qfi_matrix(m);
  const auto r = sr::run_trials(sr::DirectImaging{0.05, 8.0}, kPsf, kTruth, config(100000, 200, 3));
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(r.empirical_cov(j, j) / 200.0);
    CHECK(std::abs(r.mean(j) - (j == 0 ? 0.0 : 2.0)) <= 3.0 * se);
    // One-sided check against the classical bound of this measurement.
    CHECK(r.ratio(j) >= 1.0 - 3.0 * std::sqrt(2.0 / 199.0));
  }
  CHECK(r.empirical_cov(1, 1) * 1e5 * q.qfi(1, 1) > 1.15);
}
