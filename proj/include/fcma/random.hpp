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

#ifndef FCMA_RANDOM_HPP_
#define FCMA_RANDOM_HPP_

#include <cstdint>
#include <random>

#include "fcma/common.hpp"

namespace fcma {

using Rng = std::mt19937_64;

// Deterministic child seed for stream `index` under `master` (splitmix64
// finalizer over both words). Parallel schedules that key their work by index
// see the same streams regardless of execution order.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index);

// Fills `out` with i.i.d. standard normals. Consumes the generator in a fixed
// order so that callers drawing the same lengths in the same order reproduce
// each other exactly.
void fill_standard_normal(Rng& rng, Eigen::Ref<Vector> out);
Vector standard_normal(Rng& rng, Index n);

// Multivariate normal sampler with a precomputed symmetric factor.
//
// The covariance is regularized with jitter = 1e-8 * trace / dim on the
// diagonal before a Cholesky factorization. When that fails the factor falls
// back to an eigendecomposition with eigenvalues above -1e-8 * largest
// clipped to zero; anything more negative is a NumericalError. A zero
// covariance yields a zero factor, so draws equal the mean exactly.
class GaussianSampler {
 public:
  GaussianSampler() = default;
  GaussianSampler(Vector mean, const Matrix& covariance);

  // Draws mean + factor * e with e ~ N(0, I).
  Vector sample(Rng& rng) const;
  // Zero-mean draw: factor * e.
  Vector sample_noise(Rng& rng) const;

  const Vector& mean() const { return mean_; }
  const Matrix& factor() const { return factor_; }
  Index dim() const { return mean_.size(); }

  static Matrix symmetric_factor(const Matrix& covariance);

 private:
  Vector mean_;
  Matrix factor_;
};

}  // namespace fcma

#endif  // FCMA_RANDOM_HPP_
