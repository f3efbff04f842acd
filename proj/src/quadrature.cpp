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
#include "quadrature.hpp"

#include <cmath>

namespace superres::detail {
namespace {

// Legendre nodes on [-1, 1] by Newton iteration from the Tricomi estimate.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      // p1 = P_n(z), p0 = P_{n-1}(z)
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

QuadratureNodes make_quadrature(const QuadratureConfig& cfg, double a,
                                double b) {
  cfg.validate();
  QuadratureNodes q;
  const int n = cfg.node_count;
  if (cfg.rule == QuadratureRule::kTrapezoid) {
    const double h = (b - a) / (n - 1);
    q.x.resize(n);
    q.w.assign(n, h);
    for (int i = 0; i < n; ++i) q.x[i] = a + h * i;
    q.w.front() = q.w.back() = 0.5 * h;
    return q;
  }
  gauss_legendre(n, q.x, q.w);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    q.x[i] = mid + half * q.x[i];
    q.w[i] *= half;
  }
  return q;
}

}  // namespace superres::detail
