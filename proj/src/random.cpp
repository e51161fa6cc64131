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

#include "fcma/random.hpp"

#include <algorithm>
#include <cmath>

namespace fcma {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xd1342543de82ef95ULL + 1));
}

void fill_standard_normal(Rng& rng, Eigen::Ref<Vector> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
}

Vector standard_normal(Rng& rng, Index n) {
  Vector out(n);
  fill_standard_normal(rng, out);
  return out;
}

Matrix GaussianSampler::symmetric_factor(const Matrix& covariance) {
  const Index dim = covariance.rows();
  if (covariance.cols() != dim) {
    throw NumericalError("covariance matrix is not square");
  }
  if (!covariance.allFinite()) {
    throw NumericalError("covariance matrix has non-finite entries");
  }
  const double trace = covariance.trace();
  if (dim == 0 || (trace == 0.0 && covariance.isZero(0.0))) {
    return Matrix::Zero(dim, dim);
  }
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  Matrix jittered = sym;
  jittered.diagonal().array() += 1e-8 * std::abs(trace) / static_cast<double>(dim);
  Eigen::LLT<Matrix> llt(jittered);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(jittered);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("covariance factorization failed");
  }
  const double largest = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (eig.eigenvalues().minCoeff() < -1e-8 * largest) {
    throw NumericalError("covariance is not positive semidefinite after jitter");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

GaussianSampler::GaussianSampler(Vector mean, const Matrix& covariance)
    : mean_(std::move(mean)), factor_(symmetric_factor(covariance)) {
  if (factor_.rows() != mean_.size()) {
    throw NumericalError("mean and covariance dimensions differ");
  }
}

Vector GaussianSampler::sample_noise(Rng& rng) const {
  return factor_ * standard_normal(rng, factor_.cols());
}

Vector GaussianSampler::sample(Rng& rng) const { return mean_ + sample_noise(rng); }

}  // namespace fcma
