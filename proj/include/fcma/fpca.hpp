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

#ifndef FCMA_FPCA_HPP_
#define FCMA_FPCA_HPP_

#include "fcma/common.hpp"

namespace fcma {

// Trapezoidal weights for integrating over a grid: sum_j w_j f(t_j).
Vector trapezoid_weights(const Vector& grid);

// Mean function, eigenfunctions and eigenvalues of a curve ensemble.
//
// Eigenfunctions are orthonormal in the quadrature inner product
// <f, g>_w = sum_j w_j f(t_j) g(t_j). Each is oriented so its integral is
// positive (or, for integral ~ 0, its first non-negligible value).
struct FpcaBasis {
  Vector grid;
  Vector mean;            // T
  Vector weights;         // T, trapezoidal
  Matrix eigenfunctions;  // q_max x T, row j = v_j on the grid
  Vector eigenvalues;     // q_max, nonincreasing, >= 0
  Vector var_explained;   // q_max, cumulative proportion

  Index max_components() const { return eigenvalues.size(); }
};

// Covariance with divisor n, eigendecomposition of W^1/2 C W^1/2 mapped back
// by W^-1/2. Throws DataError when n < 2 or curves are non-finite.
FpcaBasis fit_fpca(const Matrix& curves, const Vector& grid);

// xi_j = sum_k w_k (curve_k - mu_k) v_j(t_k), j = 1..q.
Vector project_scores(const FpcaBasis& fb, const Vector& curve, Index q);
// Row-wise scores for an n x T matrix; returns n x q.
Matrix project_scores(const FpcaBasis& fb, const Matrix& curves, Index q);

// q x T matrix P with scores = P (curve - mu).
Matrix score_operator(const FpcaBasis& fb, Index q);

// Smallest q whose cumulative variance share reaches `threshold`.
Index select_ncomp(const FpcaBasis& fb, double threshold);

}  // namespace fcma

#endif  // FCMA_FPCA_HPP_
