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

#include "fcma/fpca.hpp"
#include "fcma/mediate.hpp"
#include "fcma/pipeline.hpp"
#include "fcma/simgen.hpp"
#include "support.hpp"

using namespace fcma;

namespace {

struct Fitted {
  StudyData study;
  FittedModels models;
};

Fitted small_fit(std::uint64_t seed) {
  Fitted f;
  f.study = gen_replication(Scenario::simple(150, 30, seed, CovariateSpread::StdDev));
  PipelineOptions opt;
  opt.q_override = 2;
  f.models = fit_models(f.study, opt);
  return f;
}

// Outcome parameters with the given zero-part and count-part blocks.
Vector outcome_theta(const Vector& zero_part, const Vector& count_part) {
  Vector theta(zero_part.size() + count_part.size());
  theta << zero_part, count_part;
  return theta;
}

}  // namespace

TEST_SUITE("mediate") {
  TEST_CASE("parameter draws") {
    const Fitted f = small_fit(41);
    SUBCASE("degenerate covariances return the point estimates") {
      FosrFit mediator = f.models.mediator;
      ZipFit outcome = f.models.outcome;
      mediator.coef_cov.setZero();
      outcome.cov.setZero();
      Rng rng(1);
      const ParameterDraw d = draw_model_params(mediator, outcome, rng);
      CHECK(d.mediator_theta == mediator.theta());
      CHECK(d.outcome_theta == outcome.theta);
    }
    SUBCASE("fixed seed repeats") {
      Rng a(9), b(9);
      const ParameterSampler sampler(f.models.mediator, f.models.outcome);
      const ParameterDraw da = sampler.draw(a), db = sampler.draw(b);
      CHECK(da.mediator_theta == db.mediator_theta);
      CHECK(da.outcome_theta == db.outcome_theta);
    }
    SUBCASE("draw means approach the estimates") {
      const ParameterSampler sampler(f.models.mediator, f.models.outcome);
      Rng rng(10);
      const int draws = 10000;
      const Vector est = f.models.outcome.theta;
      Vector sum = Vector::Zero(est.size());
      for (int j = 0; j < draws; ++j) sum += sampler.draw(rng).outcome_theta;
      const Vector se = f.models.outcome.standard_errors() / std::sqrt(static_cast<double>(draws));
      for (Index k = 0; k < est.size(); ++k)
        CHECK(std::abs(sum[k] / draws - est[k]) <= 4.0 * se[k]);
    }
  }

  TEST_CASE("batched scores equal scores of explicitly drawn curves") {
    const Fitted f = small_fit(42);
    const MediationContext ctx = f.models.context(f.study);
    Rng prng(3);
    const ParameterDraw d = draw_model_params(f.models.mediator, f.models.outcome, prng);
    const Matrix b = coefficients_from_theta(d.mediator_theta, f.models.mediator.num_design(),
                                             f.models.mediator.nbasis());
    for (Index i : {Index{0}, Index{7}, Index{100}}) {
      for (int a = 0; a < 2; ++a) {
        const Vector z = f.study.design_row(i, a);
        Rng r1(1000 + i), r2(1000 + i);
        const Vector curve = draw_mediator(d.mediator_theta, f.models.mediator, z, r1);
        const Vector direct = ctx.scores(curve);
        const Vector noise = standard_normal(r2, f.models.mediator.residual_factor.cols());
        const Vector batched =
            ctx.basis_scores * (b.transpose() * z) - ctx.score_offset + ctx.noise_scores * noise;
        CHECK((direct - batched).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }

  TEST_CASE("null model has no effects") {
    const Fitted f = small_fit(43);
    const MediationContext ctx = f.models.context(f.study);
    const Index k = f.models.mediator.nbasis();
    Vector mediator_theta = f.models.mediator.theta();
    mediator_theta.segment(k, k).setZero();  // treatment coefficient curve
    const Index w = f.models.design.width();
    Vector zero_part = f.models.outcome.alpha, count_part = f.models.outcome.gamma;
    zero_part.segment(1, 2).setZero();  // score terms
    count_part.segment(1, 2).setZero();
    zero_part[3] = 0.0;  // treatment
    count_part[3] = 0.0;
    REQUIRE(w == 5);
    Rng rng(4);
    const auto e =
        impute_draw_effects({mediator_theta, outcome_theta(zero_part, count_part)}, ctx, rng);
    for (double v : e) CHECK(v == 0.0);
  }

  TEST_CASE("a blocked treatment-to-mediator path has no indirect effect") {
    const Fitted f = small_fit(44);
    const MediationContext ctx = f.models.context(f.study);
    const Index k = f.models.mediator.nbasis();
    Vector mediator_theta = f.models.mediator.theta();
    mediator_theta.segment(k, k).setZero();
    const ParameterDraw d{mediator_theta, f.models.outcome.theta};

    Rng quiet(5);
    const auto exact = impute_draw_effects(d, ctx, quiet, {1, false});
    CHECK(exact[static_cast<int>(Estimand::NIE1)] == 0.0);
    CHECK(exact[static_cast<int>(Estimand::NIE0)] == 0.0);

    const int reps = 40;
    for (int e : {static_cast<int>(Estimand::NIE1), static_cast<int>(Estimand::NIE0)}) {
      std::vector<double> values;
      for (int r = 0; r < reps; ++r) {
        Rng rng(child_seed(6, static_cast<std::uint64_t>(r)));
        values.push_back(impute_draw_effects(d, ctx, rng, {4, true})[e]);
      }
      double mean = 0.0;
      for (double v : values) mean += v / reps;
      CHECK(std::abs(mean) <= 3.0 * sample_sd(values) / std::sqrt(static_cast<double>(reps)));
    }
  }

  TEST_CASE("true simple-scenario parameters recover the reference total effect") {
    const Index n = 100000, t = 100;
    const Scenario sc = Scenario::simple(n, t, 45, CovariateSpread::StdDev);
    const StudyData study = gen_replication(sc);
    const Vector& grid = study.grid;

    // Mediator model on the identity basis with the generating curves.
    FosrFit mediator;
    mediator.phi.values = Matrix::Identity(t, t);
    mediator.phi.grid = grid;
    mediator.grid = grid;
    mediator.coefficients.resize(3, t);
    for (Index j = 0; j < t; ++j) {
      mediator.coefficients(0, j) = sc.beta0(grid[j]);
      mediator.coefficients(1, j) = sc.beta1(grid[j]);
      mediator.coefficients(2, j) = sc.beta2(grid[j]);
    }
    mediator.set_residual_cov(scenario_noise_cov(sc, grid));

    // Two "components" whose scores are the two weighted integrals.
    FpcaBasis fb;
    fb.grid = grid;
    fb.weights = trapezoid_weights(grid);
    fb.mean = Vector::Zero(t);
    fb.eigenfunctions.resize(2, t);
    for (Index j = 0; j < t; ++j) {
      fb.eigenfunctions(0, j) = sc.alpha1(grid[j]);
      fb.eigenfunctions(1, j) = sc.gamma1(grid[j]);
    }
    fb.eigenvalues = Vector::Ones(2);
    fb.var_explained = Vector::Ones(2);

    const MediationContext ctx(study, mediator, fb, 2);
    Vector zero_part(5), count_part(5);
    zero_part << sc.alpha0, 1.0, 0.0, sc.alpha2, sc.alpha3;
    count_part << sc.gamma0, 0.0, 1.0, sc.gamma2, sc.gamma3;
    Vector mediator_theta(3 * t);
    for (Index r = 0; r < 3; ++r)
      mediator_theta.segment(r * t, t) = mediator.coefficients.row(r).transpose();
    Rng rng(46);
    const auto e =
        impute_draw_effects({mediator_theta, outcome_theta(zero_part, count_part)}, ctx, rng);
    CHECK(std::abs(e[static_cast<int>(Estimand::TE)] - 5.28) <= 0.15);
    CHECK(std::abs(e[static_cast<int>(Estimand::NIE1)] - 2.02) <= 0.15);
  }

  TEST_CASE("mediation run") {
    const Fitted f = small_fit(47);
    const MediationContext ctx = f.models.context(f.study);
    MediationOptions opt;
    opt.draws = 60;
    opt.seed = 123;

    SUBCASE("decomposition holds exactly in every draw") {
      const MediationResult r = run_mediation(ctx, f.models.outcome, opt);
      const Matrix& v = r.draws.values;
      const auto te = static_cast<int>(Estimand::TE);
      double worst = 0.0;
      for (Index j = 0; j < v.rows(); ++j) {
        worst = std::max(worst, std::abs(v(j, te) - v(j, 1) - v(j, 2)));
        worst = std::max(worst, std::abs(v(j, te) - v(j, 3) - v(j, 4)));
      }
      CHECK(worst == 0.0);
    }

    SUBCASE("result does not depend on the number of workers") {
      const MediationResult one = run_mediation(ctx, f.models.outcome, opt);
      opt.jobs = 3;
      const MediationResult three = run_mediation(ctx, f.models.outcome, opt);
      CHECK(one.draws.values == three.draws.values);
      opt.jobs = 1;
      opt.seed = 124;
      const MediationResult other = run_mediation(ctx, f.models.outcome, opt);
      CHECK(!(one.draws.values == other.draws.values));
    }

    SUBCASE("repeated streams collapse the interval") {
      opt.draws = 2;
      opt.repeat_first_stream = true;
      const MediationResult r = run_mediation(ctx, f.models.outcome, opt);
      for (const auto& s : r.estimates.effects) {
        CHECK(s.se == 0.0);
        CHECK(s.ci_low == s.point);
        CHECK(s.ci_high == s.point);
      }
    }

    SUBCASE("summaries are the median, SD and 2.5/97.5 percentiles of the draws") {
      const MediationResult r = run_mediation(ctx, f.models.outcome, opt);
      const Vector col = r.draws.values.col(0);
      std::vector<double> v(col.data(), col.data() + col.size());
      std::sort(v.begin(), v.end());
      const auto& s = r.estimates.effects[0];
      CHECK(s.point == doctest::Approx(0.5 * (v[29] + v[30])));
      CHECK(s.ci_low == doctest::Approx(v[1] + 0.475 * (v[2] - v[1])));
      CHECK(s.ci_high == doctest::Approx(v[57] + 0.525 * (v[58] - v[57])));
      CHECK_THROWS_AS(run_mediation(ctx, f.models.outcome, MediationOptions{1}), ConfigError);
    }
  }

  TEST_CASE("linear quantiles and sample SD") {
    CHECK(quantile_linear({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile_linear({1.0, 2.0, 3.0, 4.0, 5.0}, 0.025) == doctest::Approx(1.1));
    CHECK(sample_sd({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK_THROWS_AS(quantile_linear({}, 0.5), DataError);
  }

}  // TEST_SUITE
