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

#include "fcma/basis.hpp"

#include <limits>

namespace fcma {

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::BSplineCubic:
      return "bspline";
    case BasisKind::Fourier:
      return "fourier";
    case BasisKind::Constant:
      return "constant";
  }
  return "unknown";
}

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "bspline" || name == "bspline-cubic") return BasisKind::BSplineCubic;
  if (name == "fourier") return BasisKind::Fourier;
  if (name == "constant") return BasisKind::Constant;
  throw ConfigError("unknown basis kind '" + name + "'");
}

BasisSystem BasisSystem::bspline(int nbasis) {
  if (nbasis < 4) throw ConfigError("cubic B-spline basis needs nbasis >= 4");
  BasisSystem b{BasisKind::BSplineCubic, nbasis, Vector(nbasis + 4)};
  const int interior = nbasis - 4;
  for (int i = 0; i < 4; ++i) {
    b.knots[i] = 0.0;
    b.knots[nbasis + i] = 1.0;
  }
  for (int i = 1; i <= interior; ++i) {
    b.knots[3 + i] = static_cast<double>(i) / static_cast<double>(interior + 1);
  }
  return b;
}

BasisSystem BasisSystem::fourier(int nbasis) {
  if (nbasis < 1 || nbasis % 2 == 0) throw ConfigError("Fourier basis needs odd nbasis >= 1");
  return BasisSystem{BasisKind::Fourier, nbasis, Vector()};
}

BasisSystem BasisSystem::constant() { return BasisSystem{BasisKind::Constant, 1, Vector()}; }

BasisSystem BasisSystem::make(BasisKind kind, int nbasis) {
  switch (kind) {
    case BasisKind::BSplineCubic:
      return bspline(nbasis);
    case BasisKind::Fourier:
      return fourier(nbasis);
    case BasisKind::Constant:
      return constant();
  }
  throw ConfigError("unknown basis kind");
}

BasisMatrix eval_basis(const BasisSystem& basis, const Vector& grid) {
  BasisMatrix out{Matrix(grid.size(), basis.nbasis), grid};
  for (Index j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    if (!(t >= 0.0 && t <= 1.0)) {
      throw DataError("basis evaluation point " + std::to_string(t) + " outside [0,1]");
    }
    out.values.row(j) = basis_values(basis, t).transpose();
  }
  return out;
}

namespace {

Eigen::LLT<Matrix> gram_factor(const BasisMatrix& phi) {
  if (phi.rows() < phi.cols()) {
    throw NumericalError("basis has more functions (" + std::to_string(phi.cols()) +
                         ") than grid points (" + std::to_string(phi.rows()) + ")");
  }
  const Matrix gram = phi.values.transpose() * phi.values;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
    throw NumericalError("rank-deficient basis Gram matrix; nbasis too large for the grid");
  }
  return llt;
}

}  // namespace

Matrix projection_operator(const BasisMatrix& phi) {
  return gram_factor(phi).solve(phi.values.transpose());
}

Matrix smoother_matrix(const BasisMatrix& phi) { return phi.values * projection_operator(phi); }

Vector smooth_curve(const Vector& obs, const BasisMatrix& phi) {
  if (obs.size() != phi.rows()) throw DataError("curve length differs from basis grid");
  return gram_factor(phi).solve(phi.values.transpose() * obs);
}

Matrix smooth_curves(const Matrix& obs, const BasisMatrix& phi) {
  if (obs.cols() != phi.rows()) throw DataError("curve length differs from basis grid");
  return gram_factor(phi).solve(phi.values.transpose() * obs.transpose()).transpose();
}

GcvResult gcv_select(const Matrix& obs, BasisKind kind, int k_min, int k_max, const Vector& grid) {
  if (k_min > k_max) throw ConfigError("empty GCV range");
  const Index t = grid.size();
  if (k_max > t) throw ConfigError("GCV range exceeds the number of grid points");
  if (obs.cols() != t) throw DataError("curve length differs from grid");
  GcvResult out;
  double best = std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    if (kind == BasisKind::Fourier && k % 2 == 0) continue;
    if (kind == BasisKind::Constant && k != 1) continue;
    double score = std::numeric_limits<double>::infinity();
    if (k < t) {
      const auto phi = eval_basis(BasisSystem::make(kind, k), grid);
      const Matrix fitted = smooth_curves(obs, phi) * phi.values.transpose();
      const double sse_per_point = (obs - fitted).squaredNorm() / static_cast<double>(t);
      const double shrink = 1.0 - static_cast<double>(k) / static_cast<double>(t);
      score = sse_per_point / (shrink * shrink);
    }
    out.nbasis.push_back(k);
    out.scores.push_back(score);
    best = std::min(best, score);
  }
  if (out.nbasis.empty()) throw ConfigError("GCV range contains no admissible nbasis");
  // Scores within rounding of the minimum count as ties; the smaller basis wins.
  const double tie = best + 1e-12 * obs.squaredNorm() / static_cast<double>(t);
  for (std::size_t i = 0; i < out.nbasis.size(); ++i) {
    if (out.scores[i] <= tie) {
      out.best_nbasis = out.nbasis[i];
      break;
    }
  }
  return out;
}

}  // namespace fcma
