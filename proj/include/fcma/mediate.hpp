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

#ifndef FCMA_MEDIATE_HPP_
#define FCMA_MEDIATE_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "fcma/dataset.hpp"
#include "fcma/effects.hpp"
#include "fcma/fosr.hpp"
#include "fcma/fpca.hpp"
#include "fcma/random.hpp"
#include "fcma/zip.hpp"

namespace fcma {

// One simulated parameter set: vec(B') for the mediator model and
// (alpha', gamma')' for the outcome model.
struct ParameterDraw {
  Vector mediator_theta;
  Vector outcome_theta;
};

// Normal approximations N(theta_hat, Sigma_hat) of both models' sampling
// distributions, factorized once.
class ParameterSampler {
 public:
  ParameterSampler(const FosrFit& mediator, const ZipFit& outcome);
  // Mediator parameters first, then outcome parameters.
  ParameterDraw draw(Rng& rng) const;

 private:
  GaussianSampler mediator_;
  GaussianSampler outcome_;
};

ParameterDraw draw_model_params(const FosrFit& mediator, const ZipFit& outcome, Rng& rng);

// Everything the imputation step needs that does not change across draws.
//
// Mediator curves are mapped to outcome-model scores by
//   scores = P (S curve - mu),
// where S is the optional pre-smoother (identity when absent) and P the
// quadrature score operator of the FPCA basis.
struct MediationContext {
  const StudyData* study = nullptr;
  const FosrFit* mediator = nullptr;
  const FpcaBasis* fpca = nullptr;
  Index q = 0;
  Matrix score_map;     // q x T, P S
  Vector score_offset;  // q, P mu
  Matrix basis_scores;  // q x K, P S Phi
  Matrix noise_scores;  // q x T, P S L

  MediationContext(const StudyData& study, const FosrFit& mediator, const FpcaBasis& fpca, Index q,
                   const Matrix* presmoother = nullptr);

  Vector scores(const Vector& curve) const { return score_map * curve - score_offset; }
};

struct ImputeOptions {
  Index n_inner = 1;
  bool mediator_noise = true;
};

// Potential-outcome means E[Y(a, M(m))] for one parameter draw. For every
// subject and m in {0, 1}, n_inner mediator curves are drawn with z = [1, m, X_i]
// (same generator order as draw_mediator); each potential outcome is the ZIP
// conditional mean averaged over those curves.
PotentialMeans impute_potential_means(const ParameterDraw& draw, const MediationContext& ctx,
                                      Rng& rng, const ImputeOptions& opt = {});

std::array<double, kNumEstimands> impute_draw_effects(const ParameterDraw& draw,
                                                      const MediationContext& ctx, Rng& rng,
                                                      const ImputeOptions& opt = {});

// J x 5 matrix, columns in Estimand order.
struct EffectDraws {
  Matrix values;
  Index draws() const { return values.rows(); }
};

struct EffectSummary {
  double point = 0.0;    // median over draws
  double se = 0.0;       // standard deviation over draws
  double ci_low = 0.0;   // 2.5% quantile
  double ci_high = 0.0;  // 97.5% quantile
};

struct EffectEstimates {
  std::array<EffectSummary, kNumEstimands> effects{};
  Index draws = 0;
  std::uint64_t seed = 0;
  bool mediator_noise = true;
  Index n_inner = 1;
};

struct MediationOptions {
  Index draws = 1000;
  std::uint64_t seed = 1;
  Index n_inner = 1;
  bool mediator_noise = true;
  int jobs = 1;
  // Test hook: every draw uses the stream of draw 0.
  bool repeat_first_stream = false;
};

struct MediationResult {
  EffectDraws draws;
  EffectEstimates estimates;
};

// Draw j runs on its own generator seeded by child_seed(seed, j); rows are
// collected by index, so results do not depend on `jobs`.
MediationResult run_mediation(const MediationContext& ctx, const ZipFit& outcome,
                              const MediationOptions& opt);

// Summaries over draws.
EffectEstimates summarize_draws(const EffectDraws& draws);

// Quantile with linear interpolation between order statistics
// (h = (n - 1) p).
double quantile_linear(std::vector<double> values, double p);
double sample_sd(const std::vector<double>& values);

}  // namespace fcma

#endif  // FCMA_MEDIATE_HPP_
