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

#include "fcma/mediate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace fcma {

ParameterSampler::ParameterSampler(const FosrFit& mediator, const ZipFit& outcome)
    : mediator_(mediator.theta(), mediator.coef_cov), outcome_(outcome.theta, outcome.cov) {}

ParameterDraw ParameterSampler::draw(Rng& rng) const {
  ParameterDraw d;
  d.mediator_theta = mediator_.sample(rng);
  d.outcome_theta = outcome_.sample(rng);
  return d;
}

ParameterDraw draw_model_params(const FosrFit& mediator, const ZipFit& outcome, Rng& rng) {
  return ParameterSampler(mediator, outcome).draw(rng);
}

MediationContext::MediationContext(const StudyData& study_, const FosrFit& mediator_,
                                   const FpcaBasis& fpca_, Index q_, const Matrix* presmoother)
    : study(&study_), mediator(&mediator_), fpca(&fpca_), q(q_) {
  const Index t = study_.num_timepoints();
  if (fpca_.mean.size() != t || mediator_.grid.size() != t) {
    throw DataError("mediator model, FPCA basis and study use different grids");
  }
  if (presmoother && (presmoother->rows() != t || presmoother->cols() != t)) {
    throw DataError("pre-smoother does not match the grid");
  }
  const Matrix p = score_operator(fpca_, q_);
  score_map = presmoother ? Matrix(p * *presmoother) : p;
  score_offset = p * fpca_.mean;
  basis_scores = score_map * mediator_.phi.values;
  noise_scores = score_map * mediator_.residual_factor;
}

PotentialMeans impute_potential_means(const ParameterDraw& draw, const MediationContext& ctx,
                                      Rng& rng, const ImputeOptions& opt) {
  if (opt.n_inner < 1) throw ConfigError("n_inner must be at least 1");
  const StudyData& study = *ctx.study;
  const FosrFit& fm = *ctx.mediator;
  const Index n = study.n();
  const Index q = ctx.q;
  const Index p = study.num_covariates();
  const Index width = 1 + q + 1 + p;
  if (draw.outcome_theta.size() != 2 * width) {
    throw DataError("outcome parameters do not match the design width");
  }
  const Matrix b = coefficients_from_theta(draw.mediator_theta, fm.num_design(), fm.nbasis());
  // Score of the mean curve as a linear map of the design row.
  const Matrix design_scores = ctx.basis_scores * b.transpose();  // q x (p+2)

  const Index inner = opt.n_inner;
  Matrix scores(q, 2 * inner);  // column m * inner + k
  Vector noise(fm.residual_factor.cols());
  Vector row(width);
  PotentialMeans sums{};
  for (Index i = 0; i < n; ++i) {
    for (int m = 0; m < 2; ++m) {
      const Vector base = design_scores * study.design_row(i, m) - ctx.score_offset;
      for (Index k = 0; k < inner; ++k) {
        if (opt.mediator_noise) {
          fill_standard_normal(rng, noise);
          scores.col(m * inner + k) = base + ctx.noise_scores * noise;
        } else {
          scores.col(m * inner + k) = base;
        }
      }
    }
    row[0] = 1.0;
    if (p > 0) row.tail(p) = study.covariates.row(i).transpose();
    for (int a = 0; a < 2; ++a) {
      row[1 + q] = static_cast<double>(a);
      for (int m = 0; m < 2; ++m) {
        double acc = 0.0;
        for (Index k = 0; k < inner; ++k) {
          if (q > 0) row.segment(1, q) = scores.col(m * inner + k);
          acc += zip_mean(draw.outcome_theta, row).mean;
        }
        sums[a][m] += acc / static_cast<double>(inner);
      }
    }
  }
  for (auto& r : sums) {
    for (double& v : r) v /= static_cast<double>(n);
  }
  return sums;
}

std::array<double, kNumEstimands> impute_draw_effects(const ParameterDraw& draw,
                                                      const MediationContext& ctx, Rng& rng,
                                                      const ImputeOptions& opt) {
  return effects_from_means(impute_potential_means(draw, ctx, rng, opt));
}

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double sample_sd(const std::vector<double>& values) {
  const auto n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

EffectEstimates summarize_draws(const EffectDraws& draws) {
  EffectEstimates est;
  est.draws = draws.draws();
  for (int e = 0; e < kNumEstimands; ++e) {
    const Vector col = draws.values.col(e);
    std::vector<double> v(col.data(), col.data() + col.size());
    auto& s = est.effects[e];
    s.point = quantile_linear(v, 0.5);
    s.se = sample_sd(v);
    s.ci_low = quantile_linear(v, 0.025);
    s.ci_high = quantile_linear(v, 0.975);
  }
  return est;
}

MediationResult run_mediation(const MediationContext& ctx, const ZipFit& outcome,
                              const MediationOptions& opt) {
  if (opt.draws < 2) throw ConfigError("mediation needs at least two parameter draws");
  const ParameterSampler sampler(*ctx.mediator, outcome);
  const ImputeOptions impute{opt.n_inner, opt.mediator_noise};
  MediationResult res;
  res.draws.values.resize(opt.draws, kNumEstimands);

  auto run_one = [&](Index j) {
    Rng rng(child_seed(opt.seed, opt.repeat_first_stream ? 0 : static_cast<std::uint64_t>(j)));
    const ParameterDraw draw = sampler.draw(rng);
    const auto effects = impute_draw_effects(draw, ctx, rng, impute);
    for (int e = 0; e < kNumEstimands; ++e) res.draws.values(j, e) = effects[e];
  };

  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(opt.draws)));
  if (jobs == 1) {
    for (Index j = 0; j < opt.draws; ++j) run_one(j);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (Index j = w; j < opt.draws; j += jobs) run_one(j);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  res.estimates = summarize_draws(res.draws);
  res.estimates.seed = opt.seed;
  res.estimates.mediator_noise = opt.mediator_noise;
  res.estimates.n_inner = opt.n_inner;
  return res;
}

}  // namespace fcma
