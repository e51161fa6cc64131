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

#ifndef FCMA_SIMGEN_HPP_
#define FCMA_SIMGEN_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "fcma/common.hpp"
#include "fcma/dataset.hpp"

namespace fcma {

enum class ScenarioKind { Simple, Complex, Custom };

// How the second argument of the covariate law N(1, 3) is read.
enum class CovariateSpread { Variance, StdDev };

std::string to_string(ScenarioKind kind);
std::string to_string(CovariateSpread spread);
ScenarioKind parse_scenario_kind(const std::string& name);
CovariateSpread parse_covariate_spread(const std::string& name);

using CurveFn = std::function<double(double)>;

// Generating mechanism for one simulation scenario.
//
//   M_i(t) = beta0(t) + beta1(t) A_i + beta2(t) X_i + eps_i(t),
//   eps ~ GP(0, noise_scale * exp(-kernel_rate |s - t|)),
//   logit p_i  = alpha0 + int alpha1 M_i + alpha2 A_i + alpha3 X_i,
//   log lambda = gamma0 + int gamma1 M_i + gamma2 A_i + gamma3 X_i,
//
// with A ~ Bernoulli(treat_prob), X ~ N(x_mean, x_spread) and integrals by
// trapezoidal quadrature on an evenly spaced grid of T points.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Custom;
  Index n = 0;
  Index timepoints = 0;
  std::uint64_t seed = 0;

  CurveFn beta0, beta1, beta2;
  double noise_scale = 1.0;
  double kernel_rate = 3.0;
  double alpha0 = 0.0;
  CurveFn alpha1;
  double alpha2 = 0.0, alpha3 = 0.0;
  double gamma0 = 0.0;
  CurveFn gamma1;
  double gamma2 = 0.0, gamma3 = 0.0;

  double treat_prob = 0.5;
  double x_mean = 1.0;
  double x_spread = 3.0;
  CovariateSpread spread = CovariateSpread::Variance;

  double x_sd() const;

  static Scenario simple(Index n, Index timepoints, std::uint64_t seed,
                         CovariateSpread spread = CovariateSpread::Variance);
  static Scenario complex(Index n, Index timepoints, std::uint64_t seed,
                          CovariateSpread spread = CovariateSpread::Variance);
  static Scenario named(ScenarioKind kind, Index n, Index timepoints, std::uint64_t seed,
                        CovariateSpread spread);
};

Vector even_grid(Index timepoints);

// Gaussian-process noise covariance on the grid.
Matrix scenario_noise_cov(const Scenario& sc, const Vector& grid);

// One replication dataset; covariate column "x", ids "s1".."sn".
StudyData gen_replication(const Scenario& sc);

struct OracleEffects {
  std::array<double, kNumEstimands> value{};
  std::array<double, kNumEstimands> mc_se{};
  Index subjects = 0;
};

// Large-sample truth: for each of N fresh subjects, draw X and one potential
// mediator curve per treatment level, evaluate the exact ZIP conditional mean
// (1 - p) lambda under the true links for all four (a, m) combinations, and
// average.
OracleEffects oracle_effects(const Scenario& sc, Index subjects, std::uint64_t seed);

// Reference large-sample truths (TE, NIE1, NDE0, NIE0, NDE1) for the named
// scenarios on the 100-point grid.
std::array<double, kNumEstimands> reference_true_effects(ScenarioKind kind);

struct SpreadResolution {
  CovariateSpread chosen = CovariateSpread::StdDev;
  OracleEffects variance;         // oracle under the variance reading
  OracleEffects stddev;           // oracle under the standard-deviation reading
  double variance_max_dev = 0.0;  // max |oracle - reference| over estimands
  double stddev_max_dev = 0.0;
};

// Runs the oracle under both readings of N(1, 3) and keeps the one whose
// effects sit closest (max absolute deviation) to the reference truths.
SpreadResolution resolve_covariate_spread(ScenarioKind kind, Index timepoints, Index subjects,
                                          std::uint64_t seed);

}  // namespace fcma

#endif  // FCMA_SIMGEN_HPP_
