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

#include <cmath>
#include <numbers>
#include <vector>

#include "superres/psf.hpp"

namespace superres::detail {

struct QuadratureNodes {
  std::vector<double> x;
  std::vector<double> w;

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * f(x[i]);
    return sum;
  }
};

/// Nodes and weights of the configured rule on [a, b].
QuadratureNodes make_quadrature(const QuadratureConfig& cfg, double a,
                                double b);

}  // namespace superres::detail
