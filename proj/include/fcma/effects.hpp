/*
 * Copyright 2026 The fcma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FCMA_EFFECTS_HPP_
#define FCMA_EFFECTS_HPP_

#include <algorithm>
#include <array>
#include <cmath>

#include "fcma/common.hpp"

namespace fcma {

// Mean potential outcomes E[Y(a, M(m))], indexed [a][m].
using PotentialMeans = std::array<std::array<double, 2>, 2>;

// The five effect contrasts from the four potential-outcome means:
//   TE   = Y(1,M1) - Y(0,M0)
//   NIE1 = Y(1,M1) - Y(1,M0)    NDE0 = Y(1,M0) - Y(0,M0)
//   NIE0 = Y(0,M1) - Y(0,M0)    NDE1 = Y(1,M1) - Y(0,M1)
//
// The means are first rounded to a common power-of-two quantum 2^-50 below
// their largest magnitude. Every sum and difference of the rounded values is
// then exact in double precision, so TE - NIE1 - NDE0 and TE - NIE0 - NDE1
// evaluate to exactly zero.
inline std::array<double, kNumEstimands> effects_from_means(PotentialMeans m) {
  double largest = 0.0;
  for (const auto& row : m) {
    for (double v : row) largest = std::max(largest, std::abs(v));
  }
  if (largest > 0.0 && std::isfinite(largest)) {
    const int exponent = std::ilogb(largest) - 50;
    for (auto& row : m) {
      for (double& v : row) v = std::ldexp(std::round(std::ldexp(v, -exponent)), exponent);
    }
  }
  std::array<double, kNumEstimands> e{};
  e[static_cast<int>(Estimand::TE)] = m[1][1] - m[0][0];
  e[static_cast<int>(Estimand::NIE1)] = m[1][1] - m[1][0];
  e[static_cast<int>(Estimand::NDE0)] = m[1][0] - m[0][0];
  e[static_cast<int>(Estimand::NIE0)] = m[0][1] - m[0][0];
  e[static_cast<int>(Estimand::NDE1)] = m[1][1] - m[0][1];
  return e;
}

}  // namespace fcma

#endif  // FCMA_EFFECTS_HPP_
