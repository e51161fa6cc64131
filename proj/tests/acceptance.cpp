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

// Acceptance checks, one PASS/FAIL line per criterion on stdout. Details of
// each check go to stderr and to acceptance_report.txt in the working
// directory. The full replication profile of criterion 2 runs R = 100
// replications of n = 1000 and takes several minutes per worker; set
// FCMA_ACCEPTANCE_JOBS to use more workers.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "fcma/basis.hpp"
#include "fcma/csv.hpp"
#include "fcma/fosr.hpp"
#include "fcma/fpca.hpp"
#include "fcma/harness.hpp"
#include "fcma/mediate.hpp"
#include "fcma/pipeline.hpp"
#include "fcma/simgen.hpp"
#include "fcma/zip.hpp"
#include "support.hpp"
#include "zip_support.hpp"

using namespace fcma;
using namespace fcma::testing;
namespace fs = std::filesystem;

namespace {

std::ofstream report;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) ok = false;
    detail << (cond ? "  ok   " : "  FAIL ") << what << '\n';
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int jobs_from_env() {
  if (const char* v = std::getenv("FCMA_ACCEPTANCE_JOBS")) {
    const int j = std::atoi(v);
    if (j > 0) return j;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(double v, int digits = 4) { return csv::format(v, digits); }

// Runs one criterion, prints its verdict line, and logs details.
bool criterion(int number, const std::string& title, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = seconds_since(t0);
  const std::string line = std::string(c.ok ? "PASS" : "FAIL") + " criterion " +
                           std::to_string(number) + ": " + title + " (" + fmt(secs, 3) + " s)";
  std::cout << line << std::endl;
  std::cerr << c.detail.str();
  report << line << '\n' << c.detail.str();
  report.flush();
  return c.ok;
}

std::array<EffectSummary, kNumEstimands> read_effects(const fs::path& path) {
  const csv::Table t = csv::read(path);
  std::array<EffectSummary, kNumEstimands> out{};
  for (const auto& row : t.rows) {
    for (int e = 0; e < kNumEstimands; ++e) {
      if (row[0] != estimand_name(e)) continue;
      csv::parse_double(row[1], out[e].point);
      csv::parse_double(row[2], out[e].se);
      csv::parse_double(row[3], out[e].ci_low);
      csv::parse_double(row[4], out[e].ci_high);
    }
  }
  return out;
}

std::array<double, kNumEstimands> read_oracle(const fs::path& path) {
  const csv::Table t = csv::read(path);
  std::array<double, kNumEstimands> out{};
  for (const auto& row : t.rows) {
    for (int e = 0; e < kNumEstimands; ++e) {
      if (row[0] == estimand_name(e)) csv::parse_double(row[1], out[e]);
    }
  }
  return out;
}

void oracle_truth(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const SpreadResolution res =
      resolve_covariate_spread(ScenarioKind::Simple, 100, 100000, 20240101);
  c.detail << "  covariate spread reading selected: " << to_string(res.chosen)
           << " (max deviation sd " << fmt(res.stddev_max_dev) << ", variance "
           << fmt(res.variance_max_dev) << ")\n";
  for (ScenarioKind kind : {ScenarioKind::Simple, ScenarioKind::Complex}) {
    const OracleEffects o =
        kind == ScenarioKind::Simple
            ? (res.chosen == CovariateSpread::StdDev ? res.stddev : res.variance)
            : oracle_effects(Scenario::named(kind, 1, 100, 0, res.chosen), 100000, 20240102);
    const auto ref = reference_true_effects(kind);
    for (int e = 0; e < kNumEstimands; ++e) {
      c.expect(std::abs(o.value[e] - ref[e]) <= 0.15,
               to_string(kind) + " " + estimand_name(e) + " = " + fmt(o.value[e]) + " (reference " +
                   fmt(ref[e], 3) + ", MC se " + fmt(o.mc_se[e], 2) + ")");
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, "runtime " + fmt(secs, 3) + " s < 120 s");
}

void benchmark_profile(Check& c, const std::string& name, Index n, Index J, Index R,
                       double bias_limit, bool check_ecp, double time_limit) {
  RunConfig cfg;
  cfg.mode = RunMode::Benchmark;
  cfg.scenario = ScenarioKind::Simple;
  cfg.n = n;
  cfg.T = 100;
  cfg.R = R;
  cfg.J = J;
  cfg.nbasis = 5;
  cfg.q_override = 2;
  cfg.seed = 20240101;
  cfg.covariate_spread = SpreadReading::Auto;
  cfg.jobs = jobs_from_env();
  cfg.out = fs::current_path() / ("acceptance_" + name);
  const auto t0 = std::chrono::steady_clock::now();
  const BenchmarkResult res = run_benchmark(cfg);
  const double secs = seconds_since(t0);
  c.detail << "  [" << name << "] n=" << n << " J=" << J << " R=" << R << " jobs=" << cfg.jobs
           << ", " << res.metrics.replications << " successful, " << res.failures << " failed\n";
  for (int e = 0; e < kNumEstimands; ++e) {
    const MetricsRow& m = res.metrics.rows[e];
    c.expect(m.bias_pct <= bias_limit, "[" + name + "] " + estimand_name(e) + " BIAS " +
                                           fmt(m.bias_pct, 3) + "% <= " + fmt(bias_limit) + "%");
    if (check_ecp) {
      c.expect(m.ecp >= 88.0 && m.ecp <= 99.0,
               "[" + name + "] " + estimand_name(e) + " ECP " + fmt(m.ecp, 3) + "% in [88, 99]");
    }
    c.detail << "         truth " << fmt(m.truth) << " ASE " << fmt(m.ase) << " ESE " << fmt(m.ese)
             << '\n';
  }
  c.expect(secs < time_limit,
           "[" + name + "] runtime " + fmt(secs, 4) + " s < " + fmt(time_limit, 5) + " s");
}

void decomposition(Check& c) {
  for (ScenarioKind kind : {ScenarioKind::Simple, ScenarioKind::Complex}) {
    for (Index inner : {Index{1}, Index{3}}) {
      const StudyData s =
          gen_replication(Scenario::named(kind, 300, 60, 77 + inner, CovariateSpread::StdDev));
      PipelineOptions opt;
      opt.q_override = 3;
      const FittedModels fm = fit_models(s, opt);
      const MediationContext ctx = fm.context(s);
      MediationOptions mo;
      mo.draws = 500;
      mo.seed = 5 + static_cast<std::uint64_t>(inner);
      mo.n_inner = inner;
      const MediationResult r = run_mediation(ctx, fm.outcome, mo);
      const Matrix& v = r.draws.values;
      double worst = 0.0;
      for (Index j = 0; j < v.rows(); ++j) {
        worst = std::max(worst, std::abs(v(j, 0) - v(j, 1) - v(j, 2)));
        worst = std::max(worst, std::abs(v(j, 0) - v(j, 3) - v(j, 4)));
      }
      c.expect(worst == 0.0, to_string(kind) + ", n_inner " + std::to_string(inner) +
                                 ": max identity gap over 500 draws = " + fmt(worst));
    }
  }
}

void zip_battery(Check& c) {
  {
    const Sample s = simulate_zip(true_theta(), 500, 1);
    Rng rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Vector theta = true_theta() + 0.5 * standard_normal(rng, 8);
      const Vector g = zip_loglik(theta, s.design, s.y).gradient;
      for (Index k = 0; k < 8; ++k) {
        Vector up = theta, down = theta;
        up[k] += 1e-5;
        down[k] -= 1e-5;
        const double fd =
            (zip_loglik(up, s.design, s.y).value - zip_loglik(down, s.design, s.y).value) / 2e-5;
        worst = std::max(worst, std::abs(g[k] - fd) / std::max(1.0, std::abs(g[k])));
      }
    }
    c.expect(worst < 1e-5,
             "(a) gradient vs central differences, worst relative error " + fmt(worst));
  }
  {
    double worst = 0.0;
    for (double p : {0.0, 0.5, 0.9}) {
      for (double lambda : {0.5, 2.0, 10.0}) {
        double total = 0.0;
        for (long long y = 0; y <= 200; ++y) total += zip_pmf(p, lambda, y);
        worst = std::max(worst, std::abs(total - 1.0));
      }
    }
    c.expect(worst < 1e-10, "(b) truncated pmf normalization error " + fmt(worst));
  }
  {
    Vector theta(8);
    theta << -1000.0, 0.0, 0.0, 0.0, 0.6, 0.3, 0.4, -0.2;
    Sample s;
    Vector beta;
    bool boundary = false;
    for (std::uint64_t seed = 1; seed < 50 && !boundary; ++seed) {
      s = simulate_zip(theta, 2000, seed);
      beta = poisson_irls(s.design.rows, s.y);
      const Vector lambda = (s.design.rows * beta).array().exp();
      double score = 0.0;
      for (Index i = 0; i < s.y.size(); ++i) score += s.y[i] == 0 ? std::expm1(lambda[i]) : -1.0;
      boundary = score < 0.0;
    }
    const ZipFit fit = fit_zip(s.design, s.y);
    const double gap = (fit.gamma - beta).cwiseAbs().maxCoeff();
    c.expect(boundary && gap < 1e-4,
             "(c) no-inflation data: count coefficients vs Poisson regression, max gap " +
                 fmt(gap) + ", zero-part intercept " + fmt(fit.alpha[0]));
  }
  {
    const Vector truth = true_theta();
    std::vector<int> covered(8, 0);
    int joint = 0, unconverged = 0;
    for (int r = 0; r < 100; ++r) {
      const Sample s = simulate_zip(truth, 5000, child_seed(7, static_cast<std::uint64_t>(r)));
      const ZipFit fit = fit_zip(s.design, s.y);
      if (!fit.converged) ++unconverged;
      const Vector se = fit.standard_errors();
      bool all = true;
      for (Index k = 0; k < 8; ++k) {
        const bool in = std::abs(fit.theta[k] - truth[k]) <= 1.959963984540054 * se[k];
        covered[static_cast<std::size_t>(k)] += in;
        all = all && in;
      }
      joint += all;
    }
    int least = 100;
    std::string counts;
    for (int k = 0; k < 8; ++k) {
      least = std::min(least, covered[static_cast<std::size_t>(k)]);
      counts += (k ? " " : "") + std::to_string(covered[static_cast<std::size_t>(k)]);
    }
    c.expect(least >= 90 && unconverged == 0,
             "(d) 95% Wald coverage per coefficient at n=5000 over 100 seeds: " + counts);
    c.detail << "         all eight jointly covered in " << joint << "/100 seeds\n";
  }
}

void fda_battery(Check& c) {
  {
    double worst = 0.0;
    for (int k : {4, 5, 10, 15}) {
      const BasisSystem b = BasisSystem::bspline(k);
      for (int j = 0; j <= 1000; ++j)
        worst = std::max(worst, std::abs(basis_values(b, j / 1000.0).sum() - 1.0));
    }
    c.expect(worst < 1e-10, "B-spline partition of unity error " + fmt(worst));
  }
  {
    const StudyData s = gen_replication(Scenario::simple(200, 40, 3, CovariateSpread::StdDev));
    const FpcaBasis fb = fit_fpca(s.mediator, s.grid);
    const Matrix& v = fb.eigenfunctions;
    const double ortho =
        (v * fb.weights.asDiagonal() * v.transpose() - Matrix::Identity(v.rows(), v.rows()))
            .cwiseAbs()
            .maxCoeff();
    c.expect(ortho < 1e-8, "FPCA orthonormality error " + fmt(ortho));
    const Matrix scores = project_scores(fb, s.mediator, fb.max_components());
    const Matrix rebuilt = (scores * v).rowwise() + fb.mean.transpose();
    const double rel = (rebuilt - s.mediator).norm() / s.mediator.norm();
    c.expect(rel < 1e-6, "full-rank FPCA reconstruction relative error " + fmt(rel));
  }
  {
    StudyData s = toy_study(40, 30, 4);
    const BasisSystem basis = BasisSystem::bspline(7);
    const BasisMatrix phi = eval_basis(basis, s.grid);
    Rng rng(5);
    const Matrix b = Matrix(standard_normal(rng, 21)).reshaped(3, 7);
    s.mediator = s.design() * b * phi.values.transpose();
    const FosrFit fit = fit_fosr(s, basis);
    const double gap = (fit.coefficients - b).cwiseAbs().maxCoeff();
    c.expect(gap < 1e-8, "noise-free function-on-scalar recovery error " + fmt(gap));

    // Stacked solve with rows (z_i' kron Phi).
    s.mediator += 0.5 * Matrix(standard_normal(rng, 40 * 30)).reshaped(40, 30);
    const FosrFit noisy = fit_fosr(s, basis);
    const Matrix z = s.design();
    Matrix x = Matrix::Zero(40 * 30, 21);
    Vector y(40 * 30);
    for (Index i = 0; i < 40; ++i) {
      for (Index d = 0; d < 3; ++d) x.block(i * 30, d * 7, 30, 7) = z(i, d) * phi.values;
      y.segment(i * 30, 30) = s.mediator.row(i).transpose();
    }
    const Vector theta = x.colPivHouseholderQr().solve(y);
    const double kgap = (theta - noisy.theta()).cwiseAbs().maxCoeff();
    c.expect(kgap < 1e-8, "Kronecker-form solve vs closed form, max gap " + fmt(kgap));
  }
}

void determinism(Check& c) {
  const fs::path dir = fs::current_path() / "acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text(dir / "bench.cfg",
             "scenario = complex\nn = 150\nT = 40\nR = 4\nJ = 100\nnbasis = 5\nq_override = 2\n"
             "oracle_n = 20000\nseed = 11\ncovariate_spread = sd\n");
  write_text(dir / "mediate.cfg",
             "scenario = simple\nn = 200\nT = 40\nJ = 200\nnbasis = gcv\n"
             "seed = 12\ncovariate_spread = sd\n");
  const std::string files[] = {"metrics.csv", "effects.csv", "draws.csv"};
  for (const std::string mode : {"benchmark", "mediate"}) {
    const std::string cfg =
        (dir / ((mode == "benchmark" ? "bench" : mode) + std::string(".cfg"))).string();
    int codes = 0;
    codes += run_cli(mode + " --config " + cfg + " --out " + (dir / (mode + "_a")).string() +
                     " --jobs 1");
    codes += run_cli(mode + " --config " + cfg + " --out " + (dir / (mode + "_b")).string() +
                     " --jobs 1");
    codes += run_cli(mode + " --config " + cfg + " --out " + (dir / (mode + "_c")).string() +
                     " --jobs 3");
    c.expect(codes == 0, mode + ": all three invocations exit 0");
    for (const auto& f : files) {
      const fs::path a = dir / (mode + "_a") / f;
      if (mode == "mediate" && f == "metrics.csv") continue;
      const std::string ref = read_text(a);
      c.expect(!ref.empty() && read_text(dir / (mode + "_b") / f) == ref &&
                   read_text(dir / (mode + "_c") / f) == ref,
               mode + ": " + f + " byte-identical across reruns and --jobs 1/3");
    }
  }
}

void heldout(Check& c) {
  const fs::path data = fs::path(FCMA_SOURCE_DIR) / "data" / "heldout";
  const fs::path out = fs::current_path() / "acceptance_heldout";
  fs::remove_all(out);
  const int code =
      run_cli("mediate --config " + (data / "mediate.cfg").string() + " --out " + out.string());
  c.expect(code == 0, "fit + mediate on the shipped dataset exits 0");
  const auto est = read_effects(out / "effects.csv");
  const auto truth = read_oracle(data / "oracle.csv");
  for (int e = 0; e < kNumEstimands; ++e) {
    const double z = (est[e].point - truth[e]) / est[e].se;
    c.expect(std::abs(z) <= 3.0, std::string(estimand_name(e)) + ": estimate " + fmt(est[e].point) +
                                     ", truth " + fmt(truth[e]) + ", se " + fmt(est[e].se) +
                                     ", |z| = " + fmt(std::abs(z), 3));
  }
}

}  // namespace

int main() {
  report.open("acceptance_report.txt");
  bool all = true;
  all &= criterion(1, "oracle truth reproduction", oracle_truth);
  all &= criterion(2, "replicated simulation benchmark (full and smoke profiles)", [](Check& c) {
    benchmark_profile(c, "smoke", 200, 250, 20, 15.0, false, 600.0);
    benchmark_profile(c, "full", 1000, 1000, 100, 5.0, true, 7200.0);
  });
  all &= criterion(3, "per-draw decomposition identity", decomposition);
  all &= criterion(4, "zero-inflated Poisson correctness battery", zip_battery);
  all &= criterion(5, "functional data correctness battery", fda_battery);
  all &= criterion(6, "determinism across reruns and worker counts", determinism);
  all &= criterion(7, "applied pathway on the shipped held-out dataset", heldout);
  return all ? 0 : 1;
}
