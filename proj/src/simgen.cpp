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

#include "fcma/simgen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fcma/effects.hpp"
#include "fcma/fpca.hpp"
#include "fcma/random.hpp"
#include "fcma/zip.hpp"

namespace fcma {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Simple:
      return "simple";
    case ScenarioKind::Complex:
      return "complex";
    case ScenarioKind::Custom:
      return "custom";
  }
  return "unknown";
}

std::string to_string(CovariateSpread spread) {
  return spread == CovariateSpread::Variance ? "variance" : "sd";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "simple") return ScenarioKind::Simple;
  if (name == "complex") return ScenarioKind::Complex;
  throw ConfigError("unknown scenario '" + name + "' (expected simple or complex)");
}

CovariateSpread parse_covariate_spread(const std::string& name) {
  if (name == "variance" || name == "var") return CovariateSpread::Variance;
  if (name == "sd" || name == "stddev") return CovariateSpread::StdDev;
  throw ConfigError("unknown covariate spread reading '" + name + "' (expected variance or sd)");
}

double Scenario::x_sd() const {
  return spread == CovariateSpread::Variance ? std::sqrt(x_spread) : x_spread;
}

Scenario Scenario::simple(Index n, Index timepoints, std::uint64_t seed, CovariateSpread spread) {
  using std::numbers::pi;
  Scenario sc;
  sc.kind = ScenarioKind::Simple;
  sc.n = n;
  sc.timepoints = timepoints;
  sc.seed = seed;
  sc.spread = spread;
  sc.beta0 = [](double) { return 0.0; };
  sc.beta1 = [](double t) { return 1.5 * std::sin(0.5 * pi * t); };
  sc.beta2 = [](double) { return 0.5; };
  sc.noise_scale = 1.0;
  sc.alpha0 = -3.0;
  sc.alpha1 = [](double t) { return -4.0 * (t - 0.5) * (t - 0.5) + 1.0; };
  sc.alpha2 = 0.5;
  sc.alpha3 = 0.5;
  sc.gamma0 = 1.0;
  sc.gamma1 = [](double) { return 0.5; };
  sc.gamma2 = 1.0;
  sc.gamma3 = -0.1;
  return sc;
}

Scenario Scenario::complex(Index n, Index timepoints, std::uint64_t seed, CovariateSpread spread) {
  using std::numbers::pi;
  Scenario sc = simple(n, timepoints, seed, spread);
  sc.kind = ScenarioKind::Complex;
  sc.beta1 = [](double t) { return std::sin(3.0 * pi * t) + 1.0; };
  sc.noise_scale = 2.0;
  sc.alpha0 = -3.5;
  sc.alpha1 = [](double t) { return 0.07 * std::sin(3.0 * pi * t) + 1.0; };
  return sc;
}

Scenario Scenario::named(ScenarioKind kind, Index n, Index timepoints, std::uint64_t seed,
                         CovariateSpread spread) {
  switch (kind) {
    case ScenarioKind::Simple:
      return simple(n, timepoints, seed, spread);
    case ScenarioKind::Complex:
      return complex(n, timepoints, seed, spread);
    case ScenarioKind::Custom:
      break;
  }
  throw ConfigError("custom scenarios must be built explicitly");
}

Vector even_grid(Index timepoints) {
  if (timepoints < 2) throw ConfigError("grid needs at least two time points");
  Vector grid = Vector::LinSpaced(timepoints, 0.0, 1.0);
  grid[0] = 0.0;
  grid[timepoints - 1] = 1.0;
  return grid;
}

Matrix scenario_noise_cov(const Scenario& sc, const Vector& grid) {
  const Index t = grid.size();
  Matrix cov(t, t);
  for (Index i = 0; i < t; ++i) {
    for (Index j = 0; j < t; ++j) {
      cov(i, j) = sc.noise_scale * std::exp(-sc.kernel_rate * std::abs(grid[i] - grid[j]));
    }
  }
  return cov;
}

namespace {

struct Curves {
  Vector beta0, beta1, beta2;
  Vector alpha_weights;  // w_j alpha1(t_j)
  Vector gamma_weights;  // w_j gamma1(t_j)
};

Curves tabulate(const Scenario& sc, const Vector& grid) {
  const Index t = grid.size();
  const Vector w = trapezoid_weights(grid);
  Curves c{Vector(t), Vector(t), Vector(t), Vector(t), Vector(t)};
  for (Index j = 0; j < t; ++j) {
    const double x = grid[j];
    c.beta0[j] = sc.beta0(x);
    c.beta1[j] = sc.beta1(x);
    c.beta2[j] = sc.beta2(x);
    c.alpha_weights[j] = w[j] * sc.alpha1(x);
    c.gamma_weights[j] = w[j] * sc.gamma1(x);
  }
  return c;
}

void check(const Scenario& sc) {
  if (!sc.beta0 || !sc.beta1 || !sc.beta2 || !sc.alpha1 || !sc.gamma1) {
    throw ConfigError("scenario has unset coefficient functions");
  }
  if (sc.n < 1) throw ConfigError("scenario needs n >= 1");
  if (sc.timepoints < 2) throw ConfigError("scenario needs T >= 2");
}

}  // namespace

StudyData gen_replication(const Scenario& sc) {
  check(sc);
  const Vector grid = even_grid(sc.timepoints);
  const Curves c = tabulate(sc, grid);
  const Matrix factor = GaussianSampler::symmetric_factor(scenario_noise_cov(sc, grid));

  Rng rng(sc.seed);
  std::bernoulli_distribution treat(sc.treat_prob);
  std::normal_distribution<double> unit_normal;
  const double x_sd = sc.x_sd();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  StudyData s;
  s.grid = grid;
  s.covariate_names = {"x"};
  s.treatment.resize(sc.n);
  s.covariates.resize(sc.n, 1);
  s.outcome.resize(sc.n);
  s.mediator.resize(sc.n, sc.timepoints);
  Vector noise(sc.timepoints);
  for (Index i = 0; i < sc.n; ++i) {
    s.subject_ids.push_back("s" + std::to_string(i + 1));
    const int a = treat(rng) ? 1 : 0;
    const double x = unit_normal(rng) * x_sd + sc.x_mean;
    fill_standard_normal(rng, noise);
    const Vector m = c.beta0 + a * c.beta1 + x * c.beta2 + factor * noise;
    const double eta = sc.alpha0 + c.alpha_weights.dot(m) + sc.alpha2 * a + sc.alpha3 * x;
    const double zeta = sc.gamma0 + c.gamma_weights.dot(m) + sc.gamma2 * a + sc.gamma3 * x;
    const double p = logistic(eta);
    const double lambda = std::exp(std::clamp(zeta, -kLogRateClamp, kLogRateClamp));
    int y = 0;
    if (unit(rng) >= p) {
      std::poisson_distribution<int> count(lambda);
      y = count(rng);
    }
    s.treatment[i] = a;
    s.covariates(i, 0) = x;
    s.outcome[i] = y;
    s.mediator.row(i) = m.transpose();
  }
  return s;
}

OracleEffects oracle_effects(const Scenario& sc, Index subjects, std::uint64_t seed) {
  Scenario base = sc;
  base.n = std::max<Index>(subjects, 1);
  check(base);
  const Vector grid = even_grid(sc.timepoints);
  const Curves c = tabulate(sc, grid);
  const Matrix factor = GaussianSampler::symmetric_factor(scenario_noise_cov(sc, grid));
  // Linear functionals of the noise: int alpha1 (L e) = (L' w_alpha) . e.
  const Vector alpha_noise = factor.transpose() * c.alpha_weights;
  const Vector gamma_noise = factor.transpose() * c.gamma_weights;
  const double alpha_b0 = c.alpha_weights.dot(c.beta0), gamma_b0 = c.gamma_weights.dot(c.beta0);
  const double alpha_b1 = c.alpha_weights.dot(c.beta1), gamma_b1 = c.gamma_weights.dot(c.beta1);
  const double alpha_b2 = c.alpha_weights.dot(c.beta2), gamma_b2 = c.gamma_weights.dot(c.beta2);

  Rng rng(seed);
  std::normal_distribution<double> unit_normal;
  const double x_sd = sc.x_sd();
  Vector noise(sc.timepoints);

  // Running sums of the four means and of the five per-subject contrasts.
  PotentialMeans sums{};
  std::array<double, kNumEstimands> sq{};
  std::array<double, kNumEstimands> lin{};
  for (Index i = 0; i < subjects; ++i) {
    const double x = unit_normal(rng) * x_sd + sc.x_mean;
    double int_alpha[2];
    double int_gamma[2];
    for (int m = 0; m < 2; ++m) {
      fill_standard_normal(rng, noise);
      int_alpha[m] = alpha_b0 + m * alpha_b1 + x * alpha_b2 + alpha_noise.dot(noise);
      int_gamma[m] = gamma_b0 + m * gamma_b1 + x * gamma_b2 + gamma_noise.dot(noise);
    }
    double y[2][2];
    for (int a = 0; a < 2; ++a) {
      for (int m = 0; m < 2; ++m) {
        const double eta = sc.alpha0 + int_alpha[m] + sc.alpha2 * a + sc.alpha3 * x;
        const double zeta = sc.gamma0 + int_gamma[m] + sc.gamma2 * a + sc.gamma3 * x;
        y[a][m] = logistic(-eta) * std::exp(std::clamp(zeta, -kLogRateClamp, kLogRateClamp));
        sums[a][m] += y[a][m];
      }
    }
    const double d[kNumEstimands] = {y[1][1] - y[0][0], y[1][1] - y[1][0], y[1][0] - y[0][0],
                                     y[0][1] - y[0][0], y[1][1] - y[0][1]};
    for (int e = 0; e < kNumEstimands; ++e) {
      lin[e] += d[e];
      sq[e] += d[e] * d[e];
    }
  }
  OracleEffects out;
  out.subjects = subjects;
  const double nn = static_cast<double>(subjects);
  for (auto& row : sums) {
    for (double& v : row) v /= nn;
  }
  out.value = effects_from_means(sums);
  for (int e = 0; e < kNumEstimands; ++e) {
    const double mean = lin[e] / nn;
    const double var = subjects > 1 ? std::max(0.0, (sq[e] - nn * mean * mean) / (nn - 1.0)) : 0.0;
    out.mc_se[e] = std::sqrt(var / nn);
  }
  return out;
}

std::array<double, kNumEstimands> reference_true_effects(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Simple:
      return {5.28, 2.02, 3.26, 0.90, 4.38};
    case ScenarioKind::Complex:
      return {5.20, 1.93, 3.27, 0.88, 4.32};
    case ScenarioKind::Custom:
      break;
  }
  throw ConfigError("no reference truth for custom scenarios");
}

SpreadResolution resolve_covariate_spread(ScenarioKind kind, Index timepoints, Index subjects,
                                          std::uint64_t seed) {
  const auto reference = reference_true_effects(kind);
  auto max_dev = [&](const OracleEffects& o) {
    double d = 0.0;
    for (int e = 0; e < kNumEstimands; ++e) d = std::max(d, std::abs(o.value[e] - reference[e]));
    return d;
  };
  SpreadResolution r;
  r.variance = oracle_effects(Scenario::named(kind, 1, timepoints, 0, CovariateSpread::Variance),
                              subjects, seed);
  r.stddev = oracle_effects(Scenario::named(kind, 1, timepoints, 0, CovariateSpread::StdDev),
                            subjects, seed);
  r.variance_max_dev = max_dev(r.variance);
  r.stddev_max_dev = max_dev(r.stddev);
  r.chosen =
      r.stddev_max_dev <= r.variance_max_dev ? CovariateSpread::StdDev : CovariateSpread::Variance;
  return r;
}

}  // namespace fcma
