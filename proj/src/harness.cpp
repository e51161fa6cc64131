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

#include "fcma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "fcma/csv.hpp"
#include "fcma/output.hpp"

namespace fcma {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return csv::format(v, 12); }
// Lossless form for files that are read back.
std::string exact(double v) { return csv::format(v, 17); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

long long parse_positive(const std::string& key, const std::string& v) {
  long long out = 0;
  if (!csv::parse_int64(v, out)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  if (out <= 0) throw ConfigError(key + ": must be positive");
  return out;
}

std::uint64_t parse_seed(const std::string& v) {
  long long out = 0;
  if (!csv::parse_int64(v, out) || out < 0)
    throw ConfigError("seed: expected a non-negative integer");
  return static_cast<std::uint64_t>(out);
}

fs::path resolve(const fs::path& base, const std::string& v) {
  fs::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

std::string spread_name(SpreadReading s) {
  switch (s) {
    case SpreadReading::Auto:
      return "auto";
    case SpreadReading::Variance:
      return "variance";
    case SpreadReading::StdDev:
      return "sd";
  }
  return "auto";
}

void log_line(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << std::endl;
}

std::string meta_line(const std::string& key, const std::string& value) {
  return key + " = " + value + "\n";
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Simulate:
      return "simulate";
    case RunMode::Oracle:
      return "oracle";
    case RunMode::Fit:
      return "fit";
    case RunMode::Mediate:
      return "mediate";
    case RunMode::Benchmark:
      return "benchmark";
  }
  return "unknown";
}

RunMode parse_run_mode(const std::string& name) {
  const std::string s = lower(name);
  if (s == "simulate") return RunMode::Simulate;
  if (s == "oracle") return RunMode::Oracle;
  if (s == "fit") return RunMode::Fit;
  if (s == "mediate") return RunMode::Mediate;
  if (s == "benchmark") return RunMode::Benchmark;
  throw ConfigError("unknown mode '" + name + "'");
}

void RunConfig::check() const {
  if (n <= 0 || T <= 0 || R <= 0 || J <= 0 || n_inner <= 0 || oracle_n <= 0)
    throw ConfigError("n, T, R, J, n_inner and oracle_n must be positive");
  if (T < 2) throw ConfigError("T must be at least 2");
  if (!(fpca_threshold > 0.0 && fpca_threshold <= 1.0))
    throw ConfigError("fpca_threshold must lie in (0, 1]");
  if (jobs <= 0) throw ConfigError("jobs must be positive");
  if (!nbasis_by_gcv && nbasis <= 0) throw ConfigError("nbasis must be positive");
  if (gcv_min <= 0 || gcv_max < gcv_min) throw ConfigError("invalid GCV range");
  if (q_override && *q_override <= 0) throw ConfigError("q_override must be positive");
  if (subjects.empty() != mediator.empty())
    throw ConfigError("subjects and mediator must be given together");
  if (mode == RunMode::Benchmark && R < 2 && estimates.empty())
    throw ConfigError("benchmark needs R >= 2");
  if (!nbasis_by_gcv) BasisSystem::make(basis, nbasis);  // validates the size
}

RunConfig parse_config(std::istream& in, const fs::path& base_dir) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": bad section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = csv::trim(line.substr(0, eq));
    const std::string value = csv::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    if (key == "mode") {
      cfg.mode = parse_run_mode(value);
    } else if (key == "scenario") {
      try {
        cfg.scenario = parse_scenario_kind(value);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
      }
      if (cfg.scenario == ScenarioKind::Custom)
        throw ConfigError("scenario must be simple or complex");
    } else if (key == "subjects") {
      cfg.subjects = resolve(base_dir, value);
    } else if (key == "mediator") {
      cfg.mediator = resolve(base_dir, value);
    } else if (key == "estimates") {
      cfg.estimates = resolve(base_dir, value);
    } else if (key == "n") {
      cfg.n = parse_positive(key, value);
    } else if (key == "T") {
      cfg.T = parse_positive(key, value);
    } else if (key == "R") {
      cfg.R = parse_positive(key, value);
    } else if (key == "J") {
      cfg.J = parse_positive(key, value);
    } else if (key == "n_inner") {
      cfg.n_inner = parse_positive(key, value);
    } else if (key == "basis") {
      try {
        cfg.basis = parse_basis_kind(value);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("basis: ") + e.what());
      }
    } else if (key == "nbasis") {
      if (lower(value) == "gcv") {
        cfg.nbasis_by_gcv = true;
      } else {
        cfg.nbasis = static_cast<int>(parse_positive(key, value));
      }
    } else if (key == "gcv_min") {
      cfg.gcv_min = static_cast<int>(parse_positive(key, value));
    } else if (key == "gcv_max") {
      cfg.gcv_max = static_cast<int>(parse_positive(key, value));
    } else if (key == "fpca_threshold") {
      if (!csv::parse_double(value, cfg.fpca_threshold))
        throw ConfigError("fpca_threshold: expected a number");
    } else if (key == "q_override") {
      if (lower(value) != "none" && !value.empty()) cfg.q_override = parse_positive(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_seed(value);
    } else if (key == "covariate_spread") {
      const std::string s = lower(value);
      if (s == "auto") {
        cfg.covariate_spread = SpreadReading::Auto;
      } else {
        try {
          cfg.covariate_spread = parse_covariate_spread(s) == CovariateSpread::StdDev
                                     ? SpreadReading::StdDev
                                     : SpreadReading::Variance;
        } catch (const std::exception&) {
          throw ConfigError("covariate_spread: expected auto, sd or variance");
        }
      }
    } else if (key == "mediator_noise") {
      cfg.mediator_noise = parse_bool(key, value);
    } else if (key == "presmooth") {
      cfg.presmooth = parse_bool(key, value);
    } else if (key == "oracle_n") {
      cfg.oracle_n = parse_positive(key, value);
    } else if (key == "out") {
      cfg.out = resolve(base_dir, value);
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(parse_positive(key, value));
    } else if (key == "max_failure_share") {
      if (!csv::parse_double(value, cfg.max_failure_share) || cfg.max_failure_share < 0.0 ||
          cfg.max_failure_share > 1.0)
        throw ConfigError("max_failure_share: expected a number in [0, 1]");
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

std::string render_config(const RunConfig& cfg) {
  std::string s;
  s += meta_line("mode", cfg.mode ? to_string(*cfg.mode) : "unset");
  s += meta_line("scenario", to_string(cfg.scenario));
  if (!cfg.subjects.empty()) s += meta_line("subjects", cfg.subjects.string());
  if (!cfg.mediator.empty()) s += meta_line("mediator", cfg.mediator.string());
  if (!cfg.estimates.empty()) s += meta_line("estimates", cfg.estimates.string());
  s += meta_line("n", std::to_string(cfg.n));
  s += meta_line("T", std::to_string(cfg.T));
  s += meta_line("R", std::to_string(cfg.R));
  s += meta_line("J", std::to_string(cfg.J));
  s += meta_line("n_inner", std::to_string(cfg.n_inner));
  s += meta_line("basis", to_string(cfg.basis));
  s += meta_line("nbasis", cfg.nbasis_by_gcv ? "gcv" : std::to_string(cfg.nbasis));
  s += meta_line("gcv_min", std::to_string(cfg.gcv_min));
  s += meta_line("gcv_max", std::to_string(cfg.gcv_max));
  s += meta_line("fpca_threshold", num(cfg.fpca_threshold));
  s += meta_line("q_override", cfg.q_override ? std::to_string(*cfg.q_override) : "none");
  s += meta_line("seed", std::to_string(cfg.seed));
  s += meta_line("covariate_spread", spread_name(cfg.covariate_spread));
  s += meta_line("mediator_noise", cfg.mediator_noise ? "true" : "false");
  s += meta_line("presmooth", cfg.presmooth ? "true" : "false");
  s += meta_line("oracle_n", std::to_string(cfg.oracle_n));
  s += meta_line("max_failure_share", num(cfg.max_failure_share));
  return s;
}

MetricsTable compute_metrics(const Matrix& points, const Matrix& ses, const Matrix& ci_low,
                             const Matrix& ci_high, const std::array<double, kNumEstimands>& truth,
                             bool require_relative) {
  const Index r = points.rows();
  if (points.cols() != kNumEstimands || ses.rows() != r || ses.cols() != kNumEstimands ||
      ci_low.rows() != r || ci_low.cols() != kNumEstimands || ci_high.rows() != r ||
      ci_high.cols() != kNumEstimands)
    throw DataError("metrics inputs must be R x 5 with matching shapes");
  if (r < 2) throw DataError("metrics need at least two replications");
  MetricsTable table;
  table.replications = r;
  for (int e = 0; e < kNumEstimands; ++e) {
    MetricsRow& row = table.rows[e];
    row.truth = truth[e];
    const double mean = points.col(e).mean();
    const double gap = std::abs(mean - truth[e]);
    if (truth[e] == 0.0) {
      if (require_relative)
        throw DataError(std::string("zero truth for ") + estimand_name(e) + " with relative bias");
      row.bias_pct = gap;
      row.absolute_bias = true;
    } else {
      row.bias_pct = gap / std::abs(truth[e]) * 100.0;
    }
    row.ase = ses.col(e).mean();
    row.ese = std::sqrt((points.col(e).array() - mean).square().sum() / static_cast<double>(r - 1));
    Index hits = 0;
    for (Index i = 0; i < r; ++i) {
      if (ci_low(i, e) <= truth[e] && truth[e] <= ci_high(i, e)) ++hits;
    }
    row.ecp = 100.0 * static_cast<double>(hits) / static_cast<double>(r);
  }
  return table;
}

std::string metrics_csv(const MetricsTable& table) {
  std::ostringstream out;
  out << "estimand,truth,bias_pct,ase,ese,ecp,replications,bias_scale\n";
  for (int e = 0; e < kNumEstimands; ++e) {
    const MetricsRow& m = table.rows[e];
    out << estimand_name(e) << ',' << num(m.truth) << ',' << num(m.bias_pct) << ',' << num(m.ase)
        << ',' << num(m.ese) << ',' << num(m.ecp) << ',' << table.replications << ','
        << (m.absolute_bias ? "absolute" : "relative") << '\n';
  }
  return out.str();
}

std::string metrics_text(const MetricsTable& table) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s %8s %8s\n", "", "truth", "BIAS%", "ASE", "ESE",
                "ECP%");
  out << buf;
  for (int e = 0; e < kNumEstimands; ++e) {
    const MetricsRow& m = table.rows[e];
    std::snprintf(buf, sizeof buf, "%-6s %8.2f %8.1f %8.3f %8.3f %8.1f%s\n", estimand_name(e),
                  m.truth, m.bias_pct, m.ase, m.ese, m.ecp,
                  m.absolute_bias ? "  (absolute bias)" : "");
    out << buf;
  }
  out << "replications: " << table.replications << '\n';
  return out.str();
}

std::string replications_csv(const std::vector<ReplicationOutcome>& reps) {
  std::ostringstream out;
  out << "r,seed,status,q,zip_iterations,estimand,point,se,ci_low,ci_high,error\n";
  for (const auto& rep : reps) {
    if (!rep.ok) {
      std::string msg = rep.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << rep.index + 1 << ',' << rep.seed << ",failed,,,,,,,," << msg << '\n';
      continue;
    }
    for (int e = 0; e < kNumEstimands; ++e) {
      const EffectSummary& s = rep.estimates.effects[e];
      out << rep.index + 1 << ',' << rep.seed << ",ok," << rep.q << ',' << rep.zip_iterations << ','
          << estimand_name(e) << ',' << exact(s.point) << ',' << exact(s.se) << ','
          << exact(s.ci_low) << ',' << exact(s.ci_high) << ",\n";
    }
  }
  return out.str();
}

std::vector<ReplicationOutcome> load_replications(const fs::path& path) {
  const csv::Table table = csv::read(path);
  const int c_r = table.column("r"), c_est = table.column("estimand"), c_pt = table.column("point"),
            c_se = table.column("se"), c_lo = table.column("ci_low"),
            c_hi = table.column("ci_high");
  const int c_status = table.column("status");
  if (c_r < 0 || c_est < 0 || c_pt < 0 || c_se < 0 || c_lo < 0 || c_hi < 0)
    throw DataError(path.string() + ": needs columns r, estimand, point, se, ci_low, ci_high");
  std::map<long long, ReplicationOutcome> by_rep;
  std::map<long long, std::set<int>> filled;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = path.string() + ":" + std::to_string(table.line_numbers[i]);
    if (c_status >= 0 && row[c_status] != "ok") continue;
    long long r = 0;
    if (!csv::parse_int64(row[c_r], r)) throw DataError(where + ": bad replication index");
    int e = -1;
    for (int k = 0; k < kNumEstimands; ++k) {
      if (lower(row[c_est]) == estimand_name(k)) e = k;
    }
    if (e < 0) throw DataError(where + ": unknown estimand '" + row[c_est] + "'");
    EffectSummary s;
    if (!csv::parse_double(row[c_pt], s.point) || !csv::parse_double(row[c_se], s.se) ||
        !csv::parse_double(row[c_lo], s.ci_low) || !csv::parse_double(row[c_hi], s.ci_high))
      throw DataError(where + ": non-numeric estimate");
    if (!filled[r].insert(e).second) throw DataError(where + ": duplicate estimand");
    auto& rep = by_rep[r];
    rep.index = r - 1;
    rep.ok = true;
    rep.estimates.effects[e] = s;
  }
  std::vector<ReplicationOutcome> out;
  for (auto& [r, rep] : by_rep) {
    if (filled[r].size() != static_cast<std::size_t>(kNumEstimands))
      throw DataError(path.string() + ": replication " + std::to_string(r) +
                      " lacks some estimands");
    out.push_back(std::move(rep));
  }
  return out;
}

PipelineOptions pipeline_options(const RunConfig& cfg, int nbasis) {
  PipelineOptions opt;
  opt.basis = BasisSystem::make(cfg.basis, nbasis);
  opt.presmooth = cfg.presmooth;
  opt.fpca_threshold = cfg.fpca_threshold;
  opt.q_override = cfg.q_override;
  return opt;
}

MediationOptions mediation_options(const RunConfig& cfg, std::uint64_t seed, int jobs) {
  MediationOptions opt;
  opt.draws = cfg.J;
  opt.seed = seed;
  opt.n_inner = cfg.n_inner;
  opt.mediator_noise = cfg.mediator_noise;
  opt.jobs = jobs;
  return opt;
}

namespace {

struct Analysis {
  GcvResult gcv;
  int nbasis = 0;
  FittedModels models;
  std::optional<MediationResult> mediation;
};

GcvResult gcv_for(const RunConfig& cfg, const StudyData& study) {
  const int t = static_cast<int>(study.num_timepoints());
  const int k_min = std::max(cfg.gcv_min, cfg.basis == BasisKind::BSplineCubic ? 4 : 1);
  const int k_max = std::min(cfg.gcv_max, t);
  if (k_min > k_max) throw ConfigError("GCV range is empty for this grid");
  return gcv_select(study.mediator, cfg.basis, k_min, k_max, study.grid);
}

// Fits both models and, when `mediate` is set, runs the mediation draws.
Analysis analyze(const RunConfig& cfg, const StudyData& study, bool mediate, std::uint64_t seed,
                 int jobs) {
  Analysis a;
  a.gcv = gcv_for(cfg, study);
  a.nbasis = cfg.nbasis_by_gcv ? a.gcv.best_nbasis : cfg.nbasis;
  if (a.nbasis >= study.num_timepoints() && cfg.basis != BasisKind::Constant)
    throw ConfigError("nbasis must be smaller than T");
  a.models = fit_models(study, pipeline_options(cfg, a.nbasis));
  if (mediate) {
    const MediationContext ctx = a.models.context(study);
    a.mediation = run_mediation(ctx, a.models.outcome, mediation_options(cfg, seed, jobs));
  }
  return a;
}

std::uint64_t oracle_seed_for(const RunConfig& cfg) { return child_seed(cfg.seed, 0x0badULL); }

CovariateSpread fixed_spread(const RunConfig& cfg) {
  return cfg.covariate_spread == SpreadReading::Variance ? CovariateSpread::Variance
                                                         : CovariateSpread::StdDev;
}

// Auto resolution runs both oracle readings against the reference truths.
std::pair<CovariateSpread, std::optional<SpreadResolution>> choose_spread(const RunConfig& cfg,
                                                                          std::ostream* log) {
  if (cfg.covariate_spread != SpreadReading::Auto) return {fixed_spread(cfg), std::nullopt};
  log_line(log, "resolving covariate spread reading (" + std::to_string(cfg.oracle_n) +
                    " oracle subjects per reading)");
  SpreadResolution res =
      resolve_covariate_spread(cfg.scenario, cfg.T, cfg.oracle_n, oracle_seed_for(cfg));
  log_line(log, "covariate spread: " + to_string(res.chosen));
  return {res.chosen, res};
}

std::string spread_meta(CovariateSpread used, const std::optional<SpreadResolution>& res) {
  std::string s = meta_line("covariate_spread_used", to_string(used));
  if (res) {
    auto vals = [](const OracleEffects& o) {
      std::string v;
      for (int e = 0; e < kNumEstimands; ++e) v += (e ? " " : "") + num(o.value[e]);
      return v;
    };
    s += meta_line("spread_oracle_variance", vals(res->variance));
    s += meta_line("spread_oracle_sd", vals(res->stddev));
    s += meta_line("spread_maxdev_variance", num(res->variance_max_dev));
    s += meta_line("spread_maxdev_sd", num(res->stddev_max_dev));
  }
  return s;
}

std::string analysis_meta(const Analysis& a) {
  const FittedModels& m = a.models;
  std::string s;
  s += meta_line("nbasis_used", std::to_string(a.nbasis));
  s += meta_line("gcv_best_nbasis", std::to_string(a.gcv.best_nbasis));
  s += meta_line("q_used", std::to_string(m.q));
  double explained = 0.0;
  for (Index k = 0; k < m.q && k < m.fpca.var_explained.size(); ++k)
    explained += m.fpca.var_explained[k];
  s += meta_line("fpca_variance_explained", num(explained));
  s += meta_line("zip_converged", m.outcome.converged ? "true" : "false");
  s += meta_line("zip_iterations", std::to_string(m.outcome.iterations));
  s += meta_line("zip_loglik", num(m.outcome.loglik));
  s += meta_line("zip_gradient_norm", num(m.outcome.gradient_norm));
  s += meta_line("zip_clamp_events", std::to_string(m.outcome.clamp_events));
  for (const auto& w : m.outcome.warnings) s += meta_line("warning", w);
  return s;
}

struct Artifacts {
  std::string gcv, fosr_coefs, fpca, outcome_coefs, zipfit, effects, draws;
};

Artifacts render(const Analysis& a) {
  Artifacts out;
  out.gcv = gcv_csv(a.gcv);
  out.fosr_coefs = fosr_coefs_csv(a.models.mediator);
  out.fpca = fpca_csv(a.models.fpca, a.models.q);
  out.outcome_coefs = outcome_coefs_csv(a.models.outcome, a.models.fpca, a.models.q);
  out.zipfit = zipfit_csv(a.models.outcome);
  if (a.mediation) {
    out.effects = effects_csv(a.mediation->estimates);
    out.draws = draws_csv(a.mediation->draws);
  }
  return out;
}

void write_model_files(const fs::path& dir, const Artifacts& art) {
  write_curve_files(dir, "gcv", art.gcv, "GCV by number of basis functions", "nbasis", "GCV");
  write_curve_files(dir, "fosr_coefs", art.fosr_coefs, "Mediator coefficient functions", "t",
                    "coefficient");
  write_curve_files(dir, "fpca", art.fpca, "Mean and eigenfunctions", "t", "value");
  write_curve_files(dir, "outcome_coefs", art.outcome_coefs, "Outcome coefficient functions", "t",
                    "coefficient");
  csv::write_atomic(dir / "zipfit.csv", art.zipfit);
}

void write_mediation_files(const fs::path& dir, const Artifacts& art) {
  csv::write_atomic(dir / "effects.csv", art.effects);
  csv::write_atomic(dir / "draws.csv", art.draws);
}

std::string meta_header(const RunConfig& cfg) {
  std::string s = "# fcma run metadata\n";
  s += meta_line("fcma_version", FCMA_VERSION);
  s += meta_line("eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION));
  s += meta_line("rng", "mt19937_64 with splitmix64 child seeds");
  s += render_config(cfg);
  return s;
}

StudyData input_study(const RunConfig& cfg, CovariateSpread spread, std::string& meta) {
  if (!cfg.subjects.empty()) {
    meta += meta_line("data_source", "files");
    return load_study(cfg.subjects, cfg.mediator);
  }
  const std::uint64_t data_seed = child_seed(cfg.seed, 0);
  meta += meta_line("data_source", "scenario");
  meta += meta_line("data_seed", std::to_string(data_seed));
  return gen_replication(Scenario::named(cfg.scenario, cfg.n, cfg.T, data_seed, spread));
}

std::uint64_t mediation_seed(const RunConfig& cfg) { return child_seed(cfg.seed, 1); }

}  // namespace

ReplicationOutcome run_replication(const RunConfig& cfg, CovariateSpread spread, Index r) {
  ReplicationOutcome rep;
  rep.index = r;
  rep.seed = child_seed(cfg.seed, static_cast<std::uint64_t>(r) + 1);
  try {
    const StudyData study = gen_replication(
        Scenario::named(cfg.scenario, cfg.n, cfg.T, child_seed(rep.seed, 0), spread));
    Analysis a = analyze(cfg, study, false, 0, 1);
    rep.q = a.models.q;
    rep.zip_iterations = a.models.outcome.iterations;
    if (!a.models.outcome.converged) throw NumericalError("outcome model did not converge");
    const MediationContext ctx = a.models.context(study);
    a.mediation =
        run_mediation(ctx, a.models.outcome, mediation_options(cfg, child_seed(rep.seed, 1), 1));
    rep.estimates = a.mediation->estimates;
    const Artifacts art = render(a);
    rep.effects = art.effects;
    rep.draws = art.draws;
    rep.gcv = art.gcv;
    rep.fosr_coefs = art.fosr_coefs;
    rep.fpca = art.fpca;
    rep.outcome_coefs = art.outcome_coefs;
    rep.zipfit = art.zipfit;
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  return rep;
}

BenchmarkResult run_benchmark(const RunConfig& cfg, std::ostream* log) {
  cfg.check();
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  BenchmarkResult result;
  std::string meta = meta_header(cfg);

  auto [spread, resolution] = choose_spread(cfg, log);
  result.spread_used = spread;
  result.spread = resolution;
  meta += spread_meta(spread, resolution);

  const std::uint64_t oracle_seed = oracle_seed_for(cfg);
  if (resolution && cfg.oracle_n == resolution->stddev.subjects) {
    result.truth = spread == CovariateSpread::StdDev ? resolution->stddev : resolution->variance;
  } else {
    log_line(log, "oracle truth (" + std::to_string(cfg.oracle_n) + " subjects)");
    result.truth = oracle_effects(Scenario::named(cfg.scenario, 1, cfg.T, 0, spread), cfg.oracle_n,
                                  oracle_seed);
  }
  csv::write_atomic(dir / "oracle.csv", oracle_csv(result.truth));

  if (!cfg.estimates.empty()) {
    result.replications = load_replications(cfg.estimates);
    meta += meta_line("estimates_source", cfg.estimates.string());
  } else {
    const Index total = cfg.R;
    result.replications.resize(static_cast<std::size_t>(total));
    std::atomic<Index> next{0};
    std::atomic<Index> done{0};
    std::mutex log_mutex;
    auto worker = [&]() {
      for (Index r = next++; r < total; r = next++) {
        result.replications[static_cast<std::size_t>(r)] = run_replication(cfg, spread, r);
        const Index d = ++done;
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          const auto& rep = result.replications[static_cast<std::size_t>(r)];
          *log << "replication " << r + 1 << "/" << total
               << (rep.ok ? " ok" : " FAILED: " + rep.error) << " (" << d << " done)" << std::endl;
        }
      }
    };
    const int jobs = static_cast<int>(std::min<Index>(cfg.jobs, total));
    std::vector<std::thread> pool;
    for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  std::vector<const ReplicationOutcome*> ok;
  for (const auto& rep : result.replications) {
    if (rep.ok)
      ok.push_back(&rep);
    else
      ++result.failures;
  }
  const Index attempted = static_cast<Index>(result.replications.size());
  meta += meta_line("replications_attempted", std::to_string(attempted));
  meta += meta_line("replications_succeeded", std::to_string(ok.size()));
  meta += meta_line("replications_failed", std::to_string(result.failures));
  for (const auto& rep : result.replications) {
    if (!rep.ok)
      meta += meta_line("failed_replication", std::to_string(rep.index + 1) + " seed " +
                                                  std::to_string(rep.seed) + ": " + rep.error);
  }
  if (cfg.estimates.empty())
    csv::write_atomic(dir / "replications.csv", replications_csv(result.replications));

  const double share =
      attempted ? static_cast<double>(result.failures) / static_cast<double>(attempted) : 1.0;
  if (share > cfg.max_failure_share || ok.size() < 2) {
    csv::write_atomic(dir / "run_meta.txt", meta + meta_line("status", "failure budget exceeded"));
    throw FailureBudgetExceeded(std::to_string(result.failures) + " of " +
                                std::to_string(attempted) + " replications failed");
  }

  const Index m = static_cast<Index>(ok.size());
  Matrix pts(m, kNumEstimands), ses(m, kNumEstimands), lo(m, kNumEstimands), hi(m, kNumEstimands);
  for (Index i = 0; i < m; ++i) {
    for (int e = 0; e < kNumEstimands; ++e) {
      const EffectSummary& s = ok[static_cast<std::size_t>(i)]->estimates.effects[e];
      pts(i, e) = s.point;
      ses(i, e) = s.se;
      lo(i, e) = s.ci_low;
      hi(i, e) = s.ci_high;
    }
  }
  result.metrics = compute_metrics(pts, ses, lo, hi, result.truth.value);
  csv::write_atomic(dir / "metrics.csv", metrics_csv(result.metrics));
  csv::write_atomic(dir / "metrics_table.txt", metrics_text(result.metrics));
  log_line(log, metrics_text(result.metrics));

  // Per-fit artifacts come from the first successful simulated replication.
  const ReplicationOutcome* first = nullptr;
  for (const auto* rep : ok) {
    if (!rep->fosr_coefs.empty()) {
      first = rep;
      break;
    }
  }
  if (first) {
    Artifacts art{first->gcv,    first->fosr_coefs, first->fpca, first->outcome_coefs,
                  first->zipfit, first->effects,    first->draws};
    write_model_files(dir, art);
    write_mediation_files(dir, art);
    meta += meta_line("artifact_replication", std::to_string(first->index + 1));
  }
  meta += meta_line("status", "ok");
  csv::write_atomic(dir / "run_meta.txt", meta);
  return result;
}

void execute(const RunConfig& cfg, std::ostream* log) {
  cfg.check();
  if (!cfg.mode) throw ConfigError("mode is not set");
  const RunMode mode = *cfg.mode;
  if (mode == RunMode::Benchmark) {
    run_benchmark(cfg, log);
    return;
  }
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  std::string meta = meta_header(cfg);

  const bool needs_scenario =
      mode == RunMode::Simulate || mode == RunMode::Oracle || cfg.subjects.empty();
  CovariateSpread spread = fixed_spread(cfg);
  if (needs_scenario) {
    auto [chosen, resolution] = choose_spread(cfg, log);
    spread = chosen;
    meta += spread_meta(spread, resolution);
  }

  switch (mode) {
    case RunMode::Simulate: {
      std::string data_meta;
      const StudyData study = input_study(cfg, spread, data_meta);
      meta += data_meta;
      write_subjects(study, dir / "subjects.csv");
      write_mediator_long(study, dir / "mediator.csv");
      break;
    }
    case RunMode::Oracle: {
      const std::uint64_t oracle_seed = oracle_seed_for(cfg);
      meta += meta_line("oracle_seed", std::to_string(oracle_seed));
      const OracleEffects truth = oracle_effects(Scenario::named(cfg.scenario, 1, cfg.T, 0, spread),
                                                 cfg.oracle_n, oracle_seed);
      csv::write_atomic(dir / "oracle.csv", oracle_csv(truth));
      break;
    }
    case RunMode::Fit:
    case RunMode::Mediate: {
      const StudyData study = input_study(cfg, spread, meta);
      const ValidationReport report = validate(study);
      for (const auto& w : report.warnings) meta += meta_line("data_warning", w);
      const bool mediate = mode == RunMode::Mediate;
      const std::uint64_t seed = mediation_seed(cfg);
      if (mediate) meta += meta_line("mediation_seed", std::to_string(seed));
      const Analysis a = analyze(cfg, study, mediate, seed, cfg.jobs);
      meta += analysis_meta(a);
      const Artifacts art = render(a);
      write_model_files(dir, art);
      if (mediate) {
        write_mediation_files(dir, art);
        log_line(log, art.effects);
      }
      break;
    }
    case RunMode::Benchmark:
      break;
  }
  meta += meta_line("status", "ok");
  csv::write_atomic(dir / "run_meta.txt", meta);
}

}  // namespace fcma
