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

#include "fcma/fosr.hpp"

namespace fcma {

Vector FosrFit::theta() const {
  const Matrix bt = coefficients.transpose();
  return Eigen::Map<const Vector>(bt.data(), bt.size());
}

void FosrFit::set_residual_cov(Matrix cov) {
  residual_cov = std::move(cov);
  residual_factor = GaussianSampler::symmetric_factor(residual_cov);
}

Matrix FosrFit::coefficient_curves() const { return phi.values * coefficients.transpose(); }

Matrix coefficients_from_theta(const Vector& theta, Index num_design, Index nbasis) {
  if (theta.size() != num_design * nbasis) {
    throw DataError("coefficient vector does not match the design layout");
  }
  return Eigen::Map<const Matrix>(theta.data(), nbasis, num_design).transpose();
}

FosrFit fit_fosr(const StudyData& study, const BasisSystem& basis) {
  const Matrix z = study.design();
  const Index n = z.rows();
  const Index d = z.cols();
  if (n <= d) {
    throw DataError("function-on-scalar regression needs more subjects than design columns");
  }
  FosrFit fit;
  fit.basis = basis;
  fit.grid = study.grid;
  fit.phi = eval_basis(basis, study.grid);
  fit.design_labels = study.design_labels();

  const Matrix ztz = z.transpose() * z;
  Eigen::LLT<Matrix> ztz_llt(ztz);
  if (ztz_llt.info() != Eigen::Success || ztz_llt.rcond() < 1e-12) {
    throw NumericalError("singular Z'Z: the design [1, A, X] is collinear");
  }
  const Matrix g = projection_operator(fit.phi);  // K x T
  const Matrix ztz_inv = ztz_llt.solve(Matrix::Identity(d, d));

  fit.coefficients = ztz_llt.solve(z.transpose() * study.mediator) * g.transpose();
  const Matrix residuals = study.mediator - z * fit.coefficients * fit.phi.values.transpose();
  Matrix omega = residuals.transpose() * residuals / static_cast<double>(n - d);
  omega = 0.5 * (omega + omega.transpose());
  fit.set_residual_cov(std::move(omega));

  const Matrix inner = g * fit.residual_cov * g.transpose();
  const Index k = inner.rows();
  fit.coef_cov.resize(d * k, d * k);
  for (Index r = 0; r < d; ++r) {
    for (Index s = 0; s < d; ++s) fit.coef_cov.block(r * k, s * k, k, k) = ztz_inv(r, s) * inner;
  }
  fit.coef_cov = 0.5 * (fit.coef_cov + fit.coef_cov.transpose());
  return fit;
}

Vector predict_mean_curve(const FosrFit& fit, const Matrix& coefficients, const Vector& z) {
  if (z.size() != coefficients.rows()) throw DataError("design row length mismatch");
  return fit.phi.values * (coefficients.transpose() * z);
}

Vector predict_mean_curve(const FosrFit& fit, const Vector& z) {
  return predict_mean_curve(fit, fit.coefficients, z);
}

Vector draw_mediator(const Vector& theta, const FosrFit& fit, const Vector& z, Rng& rng) {
  const Matrix b = coefficients_from_theta(theta, fit.num_design(), fit.nbasis());
  Vector curve = predict_mean_curve(fit, b, z);
  curve += fit.residual_factor * standard_normal(rng, fit.residual_factor.cols());
  return curve;
}

}  // namespace fcma
