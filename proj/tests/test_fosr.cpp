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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fcma/fosr.hpp"
#include "fcma/simgen.hpp"
#include "support.hpp"

using namespace fcma;

namespace {

// Mediator curves built exactly from spline coefficients, plus optional noise.
StudyData span_study(const Matrix& coefs, const BasisSystem& basis, Index n, Index t, double noise,
                     std::uint64_t seed) {
  StudyData s = fcma::testing::toy_study(n, t, seed);
  const BasisMatrix phi = eval_basis(basis, s.grid);
  Rng rng(seed + 1);
  s.mediator = s.design() * coefs * phi.values.transpose();
  if (noise > 0.0) s.mediator += noise * Matrix(standard_normal(rng, n * t)).reshaped(n, t);
  return s;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix random_coefs(Index d, Index k, std::uint64_t seed) {
  Rng rng(seed);
  return Matrix(standard_normal(rng, d * k)).reshaped(d, k);
}

}  // namespace

TEST_SUITE("fosr") {
  TEST_CASE("noise-free data recover the generating coefficients") {
    const BasisSystem basis = BasisSystem::bspline(6);
    const Matrix b = random_coefs(3, 6, 1);
    const StudyData s = span_study(b, basis, 30, 40, 0.0, 2);
    const FosrFit fit = fit_fosr(s, basis);
    CHECK((fit.coefficients - b).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.residual_cov.cwiseAbs().maxCoeff() < 1e-16);
  }

  TEST_CASE("closed form equals the stacked Kronecker least-squares solve") {
    const BasisSystem basis = BasisSystem::bspline(5);
    const Index n = 25, t = 12, k = 5;
    const StudyData s = span_study(random_coefs(3, k, 3), basis, n, t, 0.7, 4);
    const FosrFit fit = fit_fosr(s, basis);
    const Matrix z = s.design();
    const Index d = z.cols();
    const Matrix& phi = fit.phi.values;

    // Row i of M is (z_i' kron Phi) vec(B').
    Matrix x(n * t, d * k);
    Vector y(n * t);
    for (Index i = 0; i < n; ++i) {
      x.middleRows(i * t, t) = kron(z.row(i), phi);
      y.segment(i * t, t) = s.mediator.row(i).transpose();
    }
    const Vector theta = x.colPivHouseholderQr().solve(y);
    CHECK((theta - fit.theta()).cwiseAbs().maxCoeff() < 1e-8);

    // Sandwich covariance of the stacked solve under errors I_n kron Omega.
    const Matrix xtx_inv = (x.transpose() * x).inverse();
    Matrix meat = Matrix::Zero(d * k, d * k);
    for (Index i = 0; i < n; ++i) {
      const Matrix xi = x.middleRows(i * t, t);
      meat += xi.transpose() * fit.residual_cov * xi;
    }
    const Matrix sandwich = xtx_inv * meat * xtx_inv;
    CHECK((sandwich - fit.coef_cov).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("residuals are orthogonal to the design and the basis") {
    const BasisSystem basis = BasisSystem::bspline(7);
    const StudyData s = span_study(random_coefs(3, 7, 5), basis, 50, 30, 1.0, 6);
    const FosrFit fit = fit_fosr(s, basis);
    const Matrix resid = s.mediator - s.design() * fit.coefficients * fit.phi.values.transpose();
    CHECK((s.design().transpose() * resid * fit.phi.values).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("a constant treatment column is rejected as singular") {
    StudyData s = fcma::testing::toy_study(20, 10, 9);
    s.treatment.setZero();
    s.covariates.resize(20, 0);
    s.covariate_names.clear();
    CHECK_THROWS_AS(fit_fosr(s, BasisSystem::bspline(5)), NumericalError);
    StudyData tiny = fcma::testing::toy_study(3, 10, 9);
    CHECK_THROWS_AS(fit_fosr(tiny, BasisSystem::bspline(5)), DataError);
  }

  TEST_CASE("predictions are linear in the design row") {
    const BasisSystem basis = BasisSystem::bspline(5);
    const StudyData s = span_study(random_coefs(3, 5, 10), basis, 40, 25, 0.5, 11);
    const FosrFit fit = fit_fosr(s, basis);
    const Matrix curves = fit.coefficient_curves();
    Vector e1 = Vector::Zero(3);
    e1[0] = 1.0;
    CHECK((predict_mean_curve(fit, e1) - curves.col(0)).cwiseAbs().maxCoeff() < 1e-12);
    Vector z1(3), z0(3);
    z1 << 1.0, 1.0, 0.4;
    z0 << 1.0, 0.0, 0.4;
    CHECK((predict_mean_curve(fit, z1) - predict_mean_curve(fit, z0) - curves.col(1))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }

  TEST_CASE("mediator draws") {
    const BasisSystem basis = BasisSystem::bspline(5);
    const StudyData s = span_study(random_coefs(3, 5, 12), basis, 60, 6, 0.8, 13);
    FosrFit fit = fit_fosr(s, basis);
    Vector z(3);
    z << 1.0, 1.0, -0.3;
    const Vector mean = predict_mean_curve(fit, z);

    SUBCASE("fixed seed gives identical curves") {
      Rng a(77), b(77);
      CHECK(draw_mediator(fit.theta(), fit, z, a) == draw_mediator(fit.theta(), fit, z, b));
    }

    SUBCASE("draw covariance converges to the residual covariance") {
      const Index draws = 10000;
      const Index t = 6;
      Rng rng(14);
      Matrix acc = Matrix::Zero(t, t);
      for (Index r = 0; r < draws; ++r) {
        const Vector e = draw_mediator(fit.theta(), fit, z, rng) - mean;
        acc += e * e.transpose();
      }
      acc /= static_cast<double>(draws);
      const Matrix& omega = fit.residual_cov;
      for (Index i = 0; i < t; ++i) {
        for (Index j = 0; j < t; ++j) {
          const double mc_se = std::sqrt((omega(i, i) * omega(j, j) + omega(i, j) * omega(i, j)) /
                                         static_cast<double>(draws));
          CHECK(std::abs(acc(i, j) - omega(i, j)) < 5.0 * mc_se);
        }
      }
    }

    SUBCASE("zero residual covariance gives the mean curve") {
      fit.set_residual_cov(Matrix::Zero(6, 6));
      Rng rng(15);
      CHECK((draw_mediator(fit.theta(), fit, z, rng) - mean).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("treatment coefficient of the simple scenario tracks its generating curve") {
    const BasisSystem basis = BasisSystem::bspline(5);
    for (std::uint64_t seed : {101u, 202u, 303u}) {
      const StudyData s =
          gen_replication(Scenario::simple(1000, 100, seed, CovariateSpread::StdDev));
      const FosrFit fit = fit_fosr(s, basis);
      const Index k = fit.nbasis();
      const Matrix cov1 = fit.coef_cov.block(k, k, k, k);
      const Matrix curves = fit.coefficient_curves();
      Index inside = 0;
      for (Index j = 0; j < s.grid.size(); ++j) {
        const Vector row = fit.phi.values.row(j).transpose();
        const double se = std::sqrt(row.dot(cov1 * row));
        const double truth = 1.5 * std::sin(0.5 * std::numbers::pi * s.grid[j]);
        if (std::abs(curves(j, 1) - truth) <= 3.0 * se) ++inside;
      }
      CHECK(inside >= 95);
    }
  }

}  // TEST_SUITE
