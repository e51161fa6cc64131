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

#include "fcma/fpca.hpp"

#include <cmath>
#include <string>

namespace fcma {

Vector trapezoid_weights(const Vector& grid) {
  const Index t = grid.size();
  Vector w = Vector::Zero(t);
  for (Index j = 0; j + 1 < t; ++j) {
    const double half = 0.5 * (grid[j + 1] - grid[j]);
    w[j] += half;
    w[j + 1] += half;
  }
  return w;
}

FpcaBasis fit_fpca(const Matrix& curves, const Vector& grid) {
  const Index n = curves.rows();
  const Index t = curves.cols();
  if (n < 2) throw DataError("FPCA needs at least two curves");
  if (t != grid.size()) throw DataError("curve length differs from grid");
  if (t < 2) throw DataError("FPCA needs at least two grid points");
  if (!curves.allFinite()) throw DataError("FPCA input has non-finite entries");

  FpcaBasis fb;
  fb.grid = grid;
  fb.weights = trapezoid_weights(grid);
  fb.mean = curves.colwise().mean().transpose();
  const Matrix centered = curves.rowwise() - fb.mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(n);

  const Vector root_w = fb.weights.cwiseSqrt();
  Matrix op = root_w.asDiagonal() * cov * root_w.asDiagonal();
  op = 0.5 * (op + op.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(op);
  if (eig.info() != Eigen::Success) throw NumericalError("FPCA eigendecomposition failed");

  // Eigen returns ascending order.
  fb.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  fb.eigenfunctions = (root_w.cwiseInverse().asDiagonal() * vectors).transpose();

  const double scale = fb.eigenfunctions.cwiseAbs().maxCoeff();
  for (Index j = 0; j < t; ++j) {
    auto v = fb.eigenfunctions.row(j);
    const double integral = v.dot(fb.weights);
    double sign = 1.0;
    if (std::abs(integral) > 1e-10 * scale) {
      sign = integral > 0.0 ? 1.0 : -1.0;
    } else {
      for (Index k = 0; k < t; ++k) {
        if (std::abs(v[k]) > 1e-10 * scale) {
          sign = v[k] > 0.0 ? 1.0 : -1.0;
          break;
        }
      }
    }
    v *= sign;
  }

  const double total = fb.eigenvalues.sum();
  fb.var_explained.resize(t);
  double running = 0.0;
  for (Index j = 0; j < t; ++j) {
    running += fb.eigenvalues[j];
    fb.var_explained[j] = total > 0.0 ? running / total : 1.0;
  }
  fb.var_explained[t - 1] = 1.0;
  return fb;
}

Matrix score_operator(const FpcaBasis& fb, Index q) {
  if (q < 0 || q > fb.max_components()) {
    throw DataError("requested " + std::to_string(q) + " components, have " +
                    std::to_string(fb.max_components()));
  }
  return fb.eigenfunctions.topRows(q) * fb.weights.asDiagonal();
}

Vector project_scores(const FpcaBasis& fb, const Vector& curve, Index q) {
  if (curve.size() != fb.mean.size()) throw DataError("curve length differs from FPCA grid");
  return score_operator(fb, q) * (curve - fb.mean);
}

Matrix project_scores(const FpcaBasis& fb, const Matrix& curves, Index q) {
  if (curves.cols() != fb.mean.size()) throw DataError("curve length differs from FPCA grid");
  return (curves.rowwise() - fb.mean.transpose()) * score_operator(fb, q).transpose();
}

Index select_ncomp(const FpcaBasis& fb, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("variance threshold must lie in (0, 1]");
  }
  for (Index j = 0; j < fb.var_explained.size(); ++j) {
    // Tolerance absorbs rounding in the cumulative sums.
    if (fb.var_explained[j] >= threshold - 1e-12) return j + 1;
  }
  return fb.var_explained.size();
}

}  // namespace fcma
