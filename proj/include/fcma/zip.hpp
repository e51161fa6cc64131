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

#ifndef FCMA_ZIP_HPP_
#define FCMA_ZIP_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcma/dataset.hpp"
#include "fcma/fpca.hpp"

namespace fcma {

// Linear predictors for the count part are clamped to this range.
inline constexpr double kLogRateClamp = 30.0;

// Functional ZIP design: rows [1, xi_1..xi_q, A, X].
struct ZipDesign {
  Matrix rows;
  Index q = 0;
  std::vector<std::string> labels;

  Index n() const { return rows.rows(); }
  Index width() const { return rows.cols(); }
};

// Design from precomputed scores (n x q) and the study's treatment and
// covariates.
ZipDesign make_zip_design(const Matrix& scores, const StudyData& study);

// Scores of `curves` (default: the study's mediator) against `fb`.
ZipDesign build_fpcr_design(const FpcaBasis& fb, const StudyData& study, Index q);
ZipDesign build_fpcr_design(const FpcaBasis& fb, const Matrix& curves, const StudyData& study,
                            Index q);

template <typename Scalar>
Scalar logistic(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// log(1 + e^x) without overflow.
template <typename Scalar>
Scalar softplus(Scalar x) {
  return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

// Two-branch ZIP mixture: p + (1-p)e^-lambda at zero, (1-p) Poisson(y)
// otherwise.
template <typename Scalar>
Scalar zip_pmf(Scalar p, Scalar lambda, long long y) {
  if (!(p >= Scalar(0) && p <= Scalar(1))) throw std::invalid_argument("zip_pmf: p outside [0,1]");
  if (!(lambda > Scalar(0))) throw std::invalid_argument("zip_pmf: lambda must be positive");
  if (y < 0) throw std::invalid_argument("zip_pmf: negative count");
  if (y == 0) return p + (Scalar(1) - p) * std::exp(-lambda);
  const Scalar yy = static_cast<Scalar>(y);
  return (Scalar(1) - p) * std::exp(-lambda + yy * std::log(lambda) - std::lgamma(yy + Scalar(1)));
}

struct ZipMoments {
  double p = 0.0;
  double lambda = 0.0;
  double mean = 0.0;  // (1 - p) lambda
};

// theta = (alpha', gamma')' with both halves the design width.
template <typename RowDerived>
ZipMoments zip_mean(const Vector& theta, const Eigen::MatrixBase<RowDerived>& row) {
  const Index w = row.size();
  const double eta = theta.head(w).dot(row);
  const double zeta = std::clamp(theta.segment(w, w).dot(row), -kLogRateClamp, kLogRateClamp);
  ZipMoments m;
  m.p = logistic(eta);
  m.lambda = std::exp(zeta);
  m.mean = logistic(-eta) * m.lambda;
  return m;
}

struct ZipLoglik {
  double value = 0.0;
  Vector gradient;
  Index clamped = 0;  // rows whose log-rate hit the clamp
};

// ZIP log-likelihood and its analytic gradient in (alpha, gamma).
ZipLoglik zip_loglik(const Vector& theta, const ZipDesign& design, const IntVector& y);

struct ZipOptions {
  double gradient_tol = 1e-6;
  int max_iterations = 500;
  double hessian_step = 1e-5;
  int poisson_newton_steps = 25;
};

struct ZipFit {
  Vector alpha;  // zero part, logit link
  Vector gamma;  // count part, log link
  Vector theta;  // (alpha', gamma')'
  Matrix cov;    // inverse observed information
  Vector init;
  double loglik = 0.0;
  double init_loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  Index clamp_events = 0;
  std::vector<std::string> labels;
  std::vector<std::string> warnings;

  Vector standard_errors() const { return cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

// Default starting point: gamma from a Poisson GLM on the positive counts,
// alpha zero except the intercept logit(max(0.05, excess zero share)).
Vector zip_default_init(const ZipDesign& design, const IntVector& y, int newton_steps = 25);

// Maximum likelihood by BFGS. Non-convergence is reported through the flag;
// a non-definite Hessian gives a PSD-projected covariance and a warning.
ZipFit fit_zip(const ZipDesign& design, const IntVector& y,
               const std::optional<Vector>& init = std::nullopt, const ZipOptions& opt = {});

// Observed information by central differences of the analytic gradient.
Matrix zip_hessian(const Vector& theta, const ZipDesign& design, const IntVector& y, double step);

// alpha_1(t) and gamma_1(t) implied by the score coefficients, T x 2.
Matrix outcome_coefficient_curves(const ZipFit& fit, const FpcaBasis& fb, Index q);

}  // namespace fcma

#endif  // FCMA_ZIP_HPP_
