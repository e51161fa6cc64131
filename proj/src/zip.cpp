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

#include "fcma/zip.hpp"

#include "fcma/optim.hpp"

namespace fcma {

ZipDesign make_zip_design(const Matrix& scores, const StudyData& study) {
  const Index n = study.n();
  if (scores.rows() != n) throw DataError("score rows differ from number of subjects");
  const Index q = scores.cols();
  const Index p = study.num_covariates();
  ZipDesign d;
  d.q = q;
  d.rows.resize(n, 1 + q + 1 + p);
  d.rows.col(0).setOnes();
  if (q > 0) d.rows.middleCols(1, q) = scores;
  d.rows.col(1 + q) = study.treatment.cast<double>();
  if (p > 0) d.rows.rightCols(p) = study.covariates;
  d.labels.push_back("intercept");
  for (Index j = 1; j <= q; ++j) d.labels.push_back("score" + std::to_string(j));
  d.labels.push_back("treatment");
  d.labels.insert(d.labels.end(), study.covariate_names.begin(), study.covariate_names.end());
  if (!d.rows.allFinite()) throw DataError("ZIP design has non-finite entries");
  return d;
}

ZipDesign build_fpcr_design(const FpcaBasis& fb, const Matrix& curves, const StudyData& study,
                            Index q) {
  return make_zip_design(project_scores(fb, curves, q), study);
}

ZipDesign build_fpcr_design(const FpcaBasis& fb, const StudyData& study, Index q) {
  return build_fpcr_design(fb, study.mediator, study, q);
}

ZipLoglik zip_loglik(const Vector& theta, const ZipDesign& design, const IntVector& y) {
  const Index w = design.width();
  if (theta.size() != 2 * w) throw DataError("parameter vector does not match ZIP design");
  if (y.size() != design.n()) throw DataError("outcome length differs from ZIP design");
  const Vector eta = design.rows * theta.head(w);
  const Vector zeta_raw = design.rows * theta.tail(w);

  ZipLoglik out;
  Vector d_eta(design.n());
  Vector d_zeta(design.n());
  double total = 0.0;
  for (Index i = 0; i < design.n(); ++i) {
    double zeta = zeta_raw[i];
    bool clamped = false;
    if (zeta > kLogRateClamp || zeta < -kLogRateClamp) {
      zeta = std::clamp(zeta, -kLogRateClamp, kLogRateClamp);
      clamped = true;
      ++out.clamped;
    }
    const double lambda = std::exp(zeta);
    const double e = eta[i];
    const double p = logistic(e);
    if (y[i] == 0) {
      // log(p + (1-p) e^-lambda) = logsumexp(eta, -lambda) - softplus(eta)
      const double m = std::max(e, -lambda);
      total += m + std::log(std::exp(e - m) + std::exp(-lambda - m)) - softplus(e);
      const double s = logistic(e + lambda);
      d_eta[i] = s - p;
      d_zeta[i] = clamped ? 0.0 : -(1.0 - s) * lambda;
    } else {
      const double yy = static_cast<double>(y[i]);
      total += -softplus(e) - lambda + yy * zeta - std::lgamma(yy + 1.0);
      d_eta[i] = -p;
      d_zeta[i] = clamped ? 0.0 : yy - lambda;
    }
  }
  out.value = total;
  out.gradient.resize(2 * w);
  out.gradient.head(w) = design.rows.transpose() * d_eta;
  out.gradient.tail(w) = design.rows.transpose() * d_zeta;
  return out;
}

namespace {

// Poisson log-linear regression by damped Newton steps.
Vector poisson_newton(const Matrix& x, const Vector& y, int steps) {
  const Index w = x.cols();
  Vector beta = Vector::Zero(w);
  const double ybar = std::max(y.mean(), 1e-3);
  beta[0] = std::log(ybar);
  auto loglik = [&](const Vector& b) {
    const Vector lin = (x * b).cwiseMax(-kLogRateClamp).cwiseMin(kLogRateClamp);
    return y.dot(lin) - lin.array().exp().sum();
  };
  double current = loglik(beta);
  for (int it = 0; it < steps; ++it) {
    const Vector lin = (x * beta).cwiseMax(-kLogRateClamp).cwiseMin(kLogRateClamp);
    const Vector mu = lin.array().exp();
    const Vector grad = x.transpose() * (y - mu);
    Matrix info = x.transpose() * mu.asDiagonal() * x;
    info.diagonal().array() += 1e-8 * (1.0 + info.diagonal().array().abs());
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success) break;
    const Vector delta = ldlt.solve(grad);
    double scale = 1.0;
    Vector next = beta + delta;
    double next_val = loglik(next);
    while (!(next_val >= current) && scale > 1e-6) {
      scale *= 0.5;
      next = beta + scale * delta;
      next_val = loglik(next);
    }
    if (!(next_val >= current)) break;
    beta = next;
    const bool done = std::abs(next_val - current) < 1e-12 * (1.0 + std::abs(current));
    current = next_val;
    if (done) break;
  }
  return beta;
}

}  // namespace

Vector zip_default_init(const ZipDesign& design, const IntVector& y, int newton_steps) {
  const Index w = design.width();
  const Index n = design.n();
  std::vector<Index> positive;
  for (Index i = 0; i < n; ++i) {
    if (y[i] > 0) positive.push_back(i);
  }
  Vector gamma = Vector::Zero(w);
  if (static_cast<Index>(positive.size()) > w) {
    Matrix xp(static_cast<Index>(positive.size()), w);
    Vector yp(static_cast<Index>(positive.size()));
    for (std::size_t k = 0; k < positive.size(); ++k) {
      xp.row(static_cast<Index>(k)) = design.rows.row(positive[k]);
      yp[static_cast<Index>(k)] = static_cast<double>(y[positive[k]]);
    }
    gamma = poisson_newton(xp, yp, newton_steps);
  } else if (!positive.empty()) {
    double sum = 0.0;
    for (Index i : positive) sum += y[i];
    gamma[0] = std::log(sum / static_cast<double>(positive.size()));
  }
  const Vector lambda =
      (design.rows * gamma).cwiseMax(-kLogRateClamp).cwiseMin(kLogRateClamp).array().exp();
  const double zero_share = static_cast<double>((y.array() == 0).count()) / static_cast<double>(n);
  const double poisson_zero_share = (-lambda.array()).exp().mean();
  const double excess = std::clamp(zero_share - poisson_zero_share, 0.05, 0.95);
  Vector theta = Vector::Zero(2 * w);
  theta[0] = std::log(excess / (1.0 - excess));
  theta.tail(w) = gamma;
  return theta;
}

Matrix zip_hessian(const Vector& theta, const ZipDesign& design, const IntVector& y, double step) {
  const Index dim = theta.size();
  Matrix h(dim, dim);
  Vector probe = theta;
  for (Index k = 0; k < dim; ++k) {
    probe[k] = theta[k] + step;
    const Vector up = zip_loglik(probe, design, y).gradient;
    probe[k] = theta[k] - step;
    const Vector down = zip_loglik(probe, design, y).gradient;
    probe[k] = theta[k];
    h.col(k) = (up - down) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

ZipFit fit_zip(const ZipDesign& design, const IntVector& y, const std::optional<Vector>& init,
               const ZipOptions& opt) {
  const Index w = design.width();
  if (y.size() != design.n()) throw DataError("outcome length differs from ZIP design");
  ZipFit fit;
  fit.labels = design.labels;
  fit.init = init ? *init : zip_default_init(design, y, opt.poisson_newton_steps);
  if (fit.init.size() != 2 * w) throw DataError("initial ZIP parameters have the wrong length");
  if (design.n() <= 2 * w) {
    fit.warnings.push_back("fewer than twice as many subjects as ZIP parameters");
  }

  Index clamps = 0;
  auto objective = [&](const Vector& theta, Vector& grad) {
    auto ll = zip_loglik(theta, design, y);
    clamps += ll.clamped;
    grad = -ll.gradient;
    return -ll.value;
  };
  BfgsOptions bo;
  bo.gradient_tol = opt.gradient_tol;
  bo.max_iterations = opt.max_iterations;
  const auto res = minimize_bfgs(objective, fit.init, bo);

  fit.init_loglik = zip_loglik(fit.init, design, y).value;
  fit.theta = res.x;
  fit.loglik = -res.value;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  fit.gradient_norm = res.gradient.lpNorm<Eigen::Infinity>();
  fit.clamp_events = clamps;
  if (clamps > 0) {
    fit.warnings.push_back("log-rate clamped to +/-30 in " + std::to_string(clamps) +
                           " evaluations");
  }
  if (!res.converged) fit.warnings.push_back("optimizer did not converge: " + res.message);
  fit.alpha = fit.theta.head(w);
  fit.gamma = fit.theta.tail(w);

  const Matrix info = -zip_hessian(fit.theta, design, y, opt.hessian_step);
  Eigen::LLT<Matrix> llt(info);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) {
    fit.cov = llt.solve(Matrix::Identity(2 * w, 2 * w));
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
    const double largest = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    Vector inv = Vector::Zero(2 * w);
    for (Index k = 0; k < 2 * w; ++k) {
      const double ev = eig.eigenvalues()[k];
      if (ev > 1e-12 * largest) inv[k] = 1.0 / ev;
    }
    fit.cov = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    fit.warnings.push_back(
        "observed information not positive definite; using PSD-projected covariance");
  }
  fit.cov = 0.5 * (fit.cov + fit.cov.transpose());
  return fit;
}

Matrix outcome_coefficient_curves(const ZipFit& fit, const FpcaBasis& fb, Index q) {
  if (q > fb.max_components()) throw DataError("q exceeds FPCA components");
  const Index t = fb.grid.size();
  Matrix out = Matrix::Zero(t, 2);
  if (q == 0) return out;
  out.col(0) = fb.eigenfunctions.topRows(q).transpose() * fit.alpha.segment(1, q);
  out.col(1) = fb.eigenfunctions.topRows(q).transpose() * fit.gamma.segment(1, q);
  return out;
}

}  // namespace fcma
