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

#ifndef FCMA_OPTIM_HPP_
#define FCMA_OPTIM_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fcma/common.hpp"

namespace fcma {

struct BfgsOptions {
  double gradient_tol = 1e-6;  // sup-norm
  int max_iterations = 500;
  int max_line_search = 50;
  double c1 = 1e-4;
  double c2 = 0.9;
  // Relative value band inside which a step is accepted on the curvature
  // condition alone (approximate Wolfe); near the optimum value differences
  // drop below rounding error before the gradient reaches tolerance.
  double value_noise = 1e-11;
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

namespace detail {

// Minimizer of the cubic through (a, fa, da), (b, fb, db), clipped to the
// safeguarded interior of [a, b]; bisection when the cubic is degenerate.
inline double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double x = 0.5 * (a + b);
  if (disc >= 0.0 && std::isfinite(disc)) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) x = b - (b - a) * (db + d2 - d1) / denom;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(x) || x < lo + margin || x > hi - margin) x = 0.5 * (a + b);
  return x;
}

}  // namespace detail

// Dense BFGS minimization of f, where f(x, grad) returns the value and
// writes the gradient. Line search enforces the strong Wolfe conditions.
// Stops when the gradient sup-norm drops below `gradient_tol`.
template <typename Objective>
BfgsResult minimize_bfgs(Objective&& f, Vector x0, const BfgsOptions& opt = {}) {
  BfgsResult res;
  const Index dim = x0.size();
  res.x = std::move(x0);
  res.gradient.resize(dim);
  res.value = f(res.x, res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    res.message = "non-finite objective at the starting point";
    return res;
  }
  Matrix h_inv = Matrix::Identity(dim, dim);
  bool scaled = false;
  Vector trial(dim);
  Vector trial_grad(dim);

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    Vector dir = -h_inv * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    // Keep the first step modest when the Hessian estimate is the identity.
    double step = 1.0;
    if (!scaled) step = std::min(1.0, 1.0 / std::max(1e-300, dir.lpNorm<Eigen::Infinity>()));

    auto eval = [&](double alpha, double& value, double& deriv) {
      trial = res.x + alpha * dir;
      value = f(trial, trial_grad);
      ++res.evaluations;
      if (!std::isfinite(value) || !trial_grad.allFinite()) {
        value = std::numeric_limits<double>::infinity();
        deriv = std::numeric_limits<double>::infinity();
        return;
      }
      deriv = trial_grad.dot(dir);
    };

    const double f0 = res.value;
    const double band = opt.value_noise * (1.0 + std::abs(f0));
    auto approx_wolfe = [&](double value, double deriv) {
      return value <= f0 + band && std::abs(deriv) <= -opt.c2 * slope;
    };
    double prev_alpha = 0.0;
    double prev_f = f0;
    double prev_d = slope;
    double alpha = step;
    bool found = false;
    double lo = 0.0, lo_f = f0, lo_d = slope, hi = 0.0, hi_f = 0.0, hi_d = 0.0;
    bool zoom = false;
    int evals = 0;
    double fa = 0.0, da = 0.0;
    while (evals < opt.max_line_search) {
      eval(alpha, fa, da);
      ++evals;
      if (std::isfinite(fa) && approx_wolfe(fa, da)) {
        found = true;
        break;
      }
      if (!std::isfinite(fa)) {
        hi = alpha;
        hi_f = fa;
        hi_d = da;
        lo = prev_alpha;
        lo_f = prev_f;
        lo_d = prev_d;
        // Back off geometrically until the objective is finite again.
        alpha = prev_alpha + 0.25 * (alpha - prev_alpha);
        continue;
      }
      if (fa > f0 + opt.c1 * alpha * slope || (evals > 1 && fa >= prev_f)) {
        lo = prev_alpha;
        lo_f = prev_f;
        lo_d = prev_d;
        hi = alpha;
        hi_f = fa;
        hi_d = da;
        zoom = true;
        break;
      }
      if (std::abs(da) <= -opt.c2 * slope) {
        found = true;
        break;
      }
      if (da >= 0.0) {
        lo = alpha;
        lo_f = fa;
        lo_d = da;
        hi = prev_alpha;
        hi_f = prev_f;
        hi_d = prev_d;
        zoom = true;
        break;
      }
      prev_alpha = alpha;
      prev_f = fa;
      prev_d = da;
      alpha *= 2.0;
    }
    while (zoom && !found && evals < opt.max_line_search) {
      if (std::isfinite(hi_f) && std::isfinite(hi_d)) {
        alpha = detail::cubic_step(lo, lo_f, lo_d, hi, hi_f, hi_d);
      } else {
        alpha = 0.5 * (lo + hi);
      }
      eval(alpha, fa, da);
      ++evals;
      if (std::isfinite(fa) && approx_wolfe(fa, da)) {
        found = true;
        break;
      }
      if (!std::isfinite(fa) || fa > f0 + opt.c1 * alpha * slope || fa >= lo_f) {
        hi = alpha;
        hi_f = fa;
        hi_d = da;
      } else {
        if (std::abs(da) <= -opt.c2 * slope) {
          found = true;
          break;
        }
        if (da * (hi - lo) >= 0.0) {
          hi = lo;
          hi_f = lo_f;
          hi_d = lo_d;
        }
        lo = alpha;
        lo_f = fa;
        lo_d = da;
      }
      if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    if (!found) {
      // Accept the best sufficient-decrease point if the search stalled.
      if (lo > 0.0 && lo_f < f0) {
        eval(lo, fa, da);
        found = true;
      } else {
        res.message = "line search failed";
        return res;
      }
    }

    const Vector s = trial - res.x;
    const Vector y = trial_grad - res.gradient;
    res.x = trial;
    res.value = fa;
    res.gradient = trial_grad;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h_inv = Matrix::Identity(dim, dim) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector hy = h_inv * y;
      h_inv += ((sy + y.dot(hy)) * rho * rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  res.converged = res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tol;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

}  // namespace fcma

#endif  // FCMA_OPTIM_HPP_
