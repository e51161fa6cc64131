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

#ifndef FCMA_TESTS_ZIP_SUPPORT_HPP_
#define FCMA_TESTS_ZIP_SUPPORT_HPP_

#include <random>

#include <Eigen/Dense>

#include "fcma/random.hpp"
#include "fcma/zip.hpp"

namespace fcma::testing {

struct Sample {
  ZipDesign design;
  IntVector y;
};

// Rows [1, s, a, x]: a standard normal score, a fair binary treatment and a
// standard normal covariate.
inline ZipDesign random_design(Index n, Rng& rng) {
  ZipDesign d;
  d.q = 1;
  d.labels = {"intercept", "score1", "treatment", "x"};
  d.rows.resize(n, 4);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < n; ++i)
    d.rows.row(i) << 1.0, normal(rng), coin(rng) ? 1.0 : 0.0, normal(rng);
  return d;
}

inline Sample simulate_zip(const Vector& theta, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Sample s;
  s.design = random_design(n, rng);
  s.y.resize(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    const ZipMoments m = zip_mean(theta, s.design.rows.row(i));
    int y = 0;
    if (unit(rng) >= m.p) y = std::poisson_distribution<int>(m.lambda)(rng);
    s.y[i] = y;
  }
  return s;
}

inline Vector true_theta() {
  Vector theta(8);
  theta << -0.5, 0.3, 0.4, -0.2, 0.8, 0.2, 0.5, -0.1;
  return theta;
}

// Poisson regression by iteratively reweighted least squares.
inline Vector poisson_irls(const Matrix& x, const IntVector& y, const Vector* weights = nullptr) {
  Vector beta = Vector::Zero(x.cols());
  const Vector yd = y.cast<double>();
  for (int it = 0; it < 100; ++it) {
    const Vector mu = (x * beta).array().exp();
    Vector w = mu;
    if (weights) w = w.cwiseProduct(*weights);
    Vector r = yd - mu;
    if (weights) r = r.cwiseProduct(*weights);
    const Matrix info = x.transpose() * w.asDiagonal() * x;
    const Vector step = info.ldlt().solve(x.transpose() * r);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return beta;
}

}  // namespace fcma::testing

#endif  // FCMA_TESTS_ZIP_SUPPORT_HPP_
