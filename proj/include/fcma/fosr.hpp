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

#ifndef FCMA_FOSR_HPP_
#define FCMA_FOSR_HPP_

#include <string>
#include <vector>

#include "fcma/basis.hpp"
#include "fcma/dataset.hpp"
#include "fcma/random.hpp"

namespace fcma {

// Fitted function-on-scalar regression M = Z B Phi' + E.
//
// `coefficients` is the (p+2) x K matrix B with rows for intercept,
// treatment and covariates. Parameter vectors are vec(B'), i.e. the rows of B
// concatenated, and `coef_cov` is the covariance of that vector.
struct FosrFit {
  BasisSystem basis;
  BasisMatrix phi;
  Matrix coefficients;     // (p+2) x K
  Matrix coef_cov;         // (p+2)K x (p+2)K
  Matrix residual_cov;     // T x T
  Matrix residual_factor;  // symmetric factor of residual_cov + jitter
  Vector grid;
  std::vector<std::string> design_labels;

  Index num_design() const { return coefficients.rows(); }
  Index nbasis() const { return coefficients.cols(); }

  // vec(B'), the mean of the coefficient sampling distribution.
  Vector theta() const;
  // Replaces the residual covariance and refreshes its factor.
  void set_residual_cov(Matrix cov);
  // Coefficient function values on the grid, T x (p+2).
  Matrix coefficient_curves() const;
};

// Rebuilds B from vec(B').
Matrix coefficients_from_theta(const Vector& theta, Index num_design, Index nbasis);

// Closed-form OLS: B = (Z'Z)^-1 Z' M Phi (Phi'Phi)^-1, residual covariance
// E'E / (n - p - 2), coefficient covariance (Z'Z)^-1 kron G Omega G' with
// G = (Phi'Phi)^-1 Phi'. Throws NumericalError for a singular Z'Z or
// Phi'Phi and DataError when n <= p + 2.
FosrFit fit_fosr(const StudyData& study, const BasisSystem& basis);

// Phi B' z for a design row z = [1, a, x].
Vector predict_mean_curve(const FosrFit& fit, const Vector& z);
Vector predict_mean_curve(const FosrFit& fit, const Matrix& coefficients, const Vector& z);

// One stochastic mediator curve Phi B(theta)' z + eps, eps ~ N(0, Omega)
// drawn through `fit.residual_factor`. Consumes exactly T normals.
Vector draw_mediator(const Vector& theta, const FosrFit& fit, const Vector& z, Rng& rng);

}  // namespace fcma

#endif  // FCMA_FOSR_HPP_
