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

#ifndef FCMA_BASIS_HPP_
#define FCMA_BASIS_HPP_

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fcma/common.hpp"

namespace fcma {

enum class BasisKind { BSplineCubic, Fourier, Constant };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& name);

// A basis system on [0, 1].
//
// Cubic B-splines use K + 4 knots: 4-fold clamped at 0 and 1 with K - 4
// equally spaced interior knots. The Fourier system is orthonormal on [0, 1]:
// 1, sqrt(2) sin(2 pi k t), sqrt(2) cos(2 pi k t), k = 1..(K-1)/2.
struct BasisSystem {
  BasisKind kind = BasisKind::BSplineCubic;
  int nbasis = 0;
  Vector knots;  // B-spline only

  static BasisSystem bspline(int nbasis);
  static BasisSystem fourier(int nbasis);
  static BasisSystem constant();
  static BasisSystem make(BasisKind kind, int nbasis);
};

// Values of all K basis functions at t. Header-only so the evaluation can run
// on any floating scalar.
template <typename Scalar>
VectorX<Scalar> basis_values(const BasisSystem& basis, Scalar t) {
  const int k = basis.nbasis;
  VectorX<Scalar> out = VectorX<Scalar>::Zero(k);
  switch (basis.kind) {
    case BasisKind::Constant:
      out.setOnes();
      return out;
    case BasisKind::Fourier: {
      out[0] = Scalar(1);
      const Scalar root2 = std::sqrt(Scalar(2));
      for (int h = 1; 2 * h <= k - 1; ++h) {
        const Scalar arg = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(h) * t;
        out[2 * h - 1] = root2 * std::sin(arg);
        out[2 * h] = root2 * std::cos(arg);
      }
      return out;
    }
    case BasisKind::BSplineCubic: {
      constexpr int degree = 3;
      const auto& u = basis.knots;
      // Knot span containing t; the right end belongs to the last span.
      int span = k - 1;
      if (t < Scalar(u[k])) {
        int lo = degree;
        int hi = k;
        while (hi - lo > 1) {
          const int mid = (lo + hi) / 2;
          if (t < Scalar(u[mid]))
            hi = mid;
          else
            lo = mid;
        }
        span = lo;
      }
      // Triangular Cox-de Boor evaluation of the degree + 1 nonzero functions.
      Scalar n[degree + 1];
      Scalar left[degree + 1];
      Scalar right[degree + 1];
      n[0] = Scalar(1);
      for (int j = 1; j <= degree; ++j) {
        left[j] = t - Scalar(u[span + 1 - j]);
        right[j] = Scalar(u[span + j]) - t;
        Scalar saved = Scalar(0);
        for (int r = 0; r < j; ++r) {
          const Scalar temp = n[r] / (right[r + 1] + left[j - r]);
          n[r] = saved + right[r + 1] * temp;
          saved = left[j - r] * temp;
        }
        n[j] = saved;
      }
      for (int r = 0; r <= degree; ++r) out[span - degree + r] = n[r];
      return out;
    }
  }
  return out;
}

// Basis evaluated on a grid: values(j, k) = phi_k(t_j).
struct BasisMatrix {
  Matrix values;
  Vector grid;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

// Throws DataError when a grid point lies outside [0, 1].
BasisMatrix eval_basis(const BasisSystem& basis, const Vector& grid);

// Least-squares coefficients c = (Phi' Phi)^-1 Phi' obs. Throws
// NumericalError when Phi' Phi is numerically rank deficient.
Vector smooth_curve(const Vector& obs, const BasisMatrix& phi);

// Row-wise smoothing of an n x T matrix; returns n x K coefficients.
Matrix smooth_curves(const Matrix& obs, const BasisMatrix& phi);

// (Phi' Phi)^-1 Phi', the K x T map from observations to coefficients.
Matrix projection_operator(const BasisMatrix& phi);

// Phi (Phi' Phi)^-1 Phi', the T x T hat matrix of the least-squares smoother.
Matrix smoother_matrix(const BasisMatrix& phi);

struct GcvResult {
  int best_nbasis = 0;
  std::vector<int> nbasis;
  std::vector<double> scores;
};

// Summed per-curve GCV over a range of basis sizes:
//   GCV(K) = sum_i (SSE_i(K) / T) / (1 - K / T)^2.
// K == T gives +inf. Ties within rounding go to the smaller K. Throws on an
// empty range or K > T.
GcvResult gcv_select(const Matrix& obs, BasisKind kind, int k_min, int k_max, const Vector& grid);

}  // namespace fcma

#endif  // FCMA_BASIS_HPP_
