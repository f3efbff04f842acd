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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "superres/errors.hpp"
#include "superres/psf.hpp"

namespace sr = superres;

namespace {

sr::PsfSpec sampled_gaussian(double sigma, double step, double half) {
  std::vector<double> x, v;
  const int n = static_cast<int>(std::lround(half / step));
  for (int i = -n; i <= n; ++i) {
    const double xi = i * step;
    x.push_back(xi);
    v.push_back(std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) *
                std::exp(-xi * xi / (4.0 * sigma * sigma)));
  }
  return sr::PsfSpec::tabulated(std::move(x), std::move(v));
}

}  // namespace

TEST_CASE("closed forms at the Rayleigh distance") {
  const auto psf = sr::PsfSpec::gaussian(1.0);
  const sr::OverlapSet ov = sr::compute_overlaps(psf, 2.0);
  CHECK(ov.delta == doctest::Approx(0.6065306597126333).epsilon(1e-15));
  CHECK(ov.kappa == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ov.gamma == doctest::Approx(-0.3032653298563167).epsilon(1e-15));
  CHECK(ov.beta == 0.0);
  CHECK(ov.eta3 == doctest::Approx(0.1275113496672306).epsilon(1e-12));
  CHECK(ov.eta4 == doctest::Approx(0.43903587811405337).epsilon(1e-12));
}

TEST_CASE("closed forms at one width") {
  const sr::OverlapSet ov = sr::compute_overlaps(sr::PsfSpec::gaussian(1.0), 1.0);
  CHECK(ov.delta == doctest::Approx(0.8824969025845952).epsilon(1e-14));
  CHECK(ov.gamma == doctest::Approx(-0.22062422564614884).epsilon(1e-14));
  CHECK(ov.beta == doctest::Approx(0.16546816923461163).epsilon(1e-14));
  CHECK(ov.eta3 == doctest::Approx(0.03497647006966769).epsilon(1e-10));
  CHECK(ov.eta4 == doctest::Approx(0.24222961940685805).epsilon(1e-12));
}

TEST_CASE("quadrature agrees with closed forms over a sweep") {
  for (double sigma : {1.0, 0.37, 2.5}) {
    const auto psf = sr::PsfSpec::gaussian(sigma);
    for (int i = 0; i < 50; ++i) {
      const double t = sigma * (0.1 + (8.0 - 0.1) * i / 49.0);
      const auto a = sr::compute_overlaps(psf, t);
      const auto q = sr::compute_overlaps_quadrature(psf, t);
      const double s2 = sigma * sigma;
      CHECK(std::abs(a.delta - q.delta) <= 1e-10);
      CHECK(std::abs(a.kappa - q.kappa) * s2 <= 1e-10);
      CHECK(std::abs(a.gamma - q.gamma) * sigma <= 1e-10);
      CHECK(std::abs(a.beta - q.beta) * s2 <= 1e-10);
    }
  }
}

TEST_CASE("Gauss-Legendre rule reproduces the trapezoid overlaps") {
  const auto psf = sr::PsfSpec::gaussian(1.0);
  sr::QuadratureConfig gl{12.0, 401, sr::QuadratureRule::kGaussLegendre};
  for (double t : {0.3, 1.0, 2.0, 5.0}) {
    const auto a = sr::compute_overlaps(psf, t);
    const auto q = sr::compute_overlaps_quadrature(psf, t, gl);
    CHECK(std::abs(a.delta - q.delta) <= 1e-11);
    CHECK(std::abs(a.beta - q.beta) <= 1e-11);
  }
  CHECK(std::abs(sr::compute_overlaps_quadrature(psf, 2.0, gl).beta) <= 1e-12);
}

TEST_CASE("invalid quadrature configurations") {
  const auto psf = sr::PsfSpec::gaussian(1.0);
  CHECK_THROWS_AS(sr::compute_overlaps_quadrature(psf, 1.0, {12.0, 2000}),
                  sr::InvalidArgument);
  CHECK_THROWS_AS(sr::compute_overlaps_quadrature(psf, 1.0, {0.0, 2001}),
                  sr::InvalidArgument);
}

TEST_CASE("coincident sources are singular") {
  const auto psf = sr::PsfSpec::gaussian(1.0);
  CHECK_THROWS_AS(sr::compute_overlaps(psf, 1e-9), sr::SingularBasis);
  CHECK_THROWS_AS(sr::compute_overlaps(psf, 1e-9), sr::DomainError);
  CHECK_THROWS_AS(sr::SceneParams(0.0, 0.0), sr::InvalidArgument);
  CHECK_THROWS_AS(sr::SceneParams(0.0, -1.0), sr::InvalidArgument);
  CHECK_THROWS_AS(sr::PsfSpec::gaussian(0.0), sr::InvalidArgument);
}

TEST_CASE("autocorrelation and derivative correlation") {
  const auto psf = sr::PsfSpec::gaussian(1.3);
  const auto ov = sr::compute_overlaps(psf, 1.7);
  CHECK(sr::psf_autocorrelation(psf, 1.7) == doctest::Approx(ov.delta));
  CHECK(sr::psf_derivative_correlation(psf, 1.7) == doctest::Approx(ov.gamma));
  CHECK(sr::psf_autocorrelation(psf, 0.0) == doctest::Approx(1.0));
  CHECK(sr::psf_intensity_cdf(psf, 0.0) == doctest::Approx(0.5));
  CHECK(sr::psf_intensity_cdf(psf, 30.0) == doctest::Approx(1.0));
}

TEST_CASE("tabulated Gaussian tracks the analytic one") {
  const auto tab = sampled_gaussian(1.0, 0.002, 10.0);
  CHECK(tab.sigma() == doctest::Approx(1.0).epsilon(1e-5));
  for (double x : {-1.3, 0.0, 0.41, 2.2}) {
    CHECK(sr::psf_value(tab, x) ==
          doctest::Approx(sr::psf_value(sr::PsfSpec::gaussian(1.0), x)).epsilon(1e-6));
    CHECK(sr::psf_derivative(tab, x) ==
          doctest::Approx(sr::psf_derivative(sr::PsfSpec::gaussian(1.0), x))
              .epsilon(1e-5));
  }
  const auto a = sr::compute_overlaps(sr::PsfSpec::gaussian(1.0), 2.0);
  const auto b = sr::compute_overlaps(tab, 2.0);
  CHECK(std::abs(a.delta - b.delta) <= 1e-5);
  CHECK(std::abs(a.kappa - b.kappa) <= 1e-5);
  CHECK(std::abs(a.gamma - b.gamma) <= 1e-5);
  CHECK(std::abs(a.beta - b.beta) <= 1e-5);
  CHECK(sr::psf_intensity_cdf(tab, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tabulated PSF validation") {
  CHECK_THROWS_AS(sr::PsfSpec::tabulated({0.0, 1.0, 3.0}, {0.1, 0.2, 0.1}),
                  sr::InvalidArgument);
  CHECK_THROWS_AS(sr::PsfSpec::tabulated({-1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}),
                  sr::InvalidArgument);
  std::vector<double> x{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> v{0.0, 0.3, 0.9, 0.6, 0.0};
  CHECK_THROWS_AS(sr::PsfSpec::tabulated(x, v), sr::InvalidArgument);
}

TEST_CASE("loading a tabulated PSF from disk") {
  const auto path = std::filesystem::temp_directory_path() / "superres_psf_test.txt";
  {
    std::ofstream out(path);
    out << "# x psi\n";
    const int n = 4000;
    for (int i = -n; i <= n; ++i) {
      const double x = i * 0.0025;
      out.precision(17);
      out << x << ' '
          << std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-x * x / 4.0) << '\n';
    }
  }
  const auto psf = sr::PsfSpec::load_tabulated(path);
  CHECK_FALSE(psf.is_gaussian());
  CHECK(psf.sigma() == doctest::Approx(1.0).epsilon(1e-4));

  {
    std::ofstream out(path);
    out << "0.0 1.0\nnot-a-number 2\n";
  }
  try {
    sr::PsfSpec::load_tabulated(path);
    FAIL("expected a parse failure");
  } catch (const sr::Error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(sr::PsfSpec::load_tabulated(path), sr::IoError);
}
