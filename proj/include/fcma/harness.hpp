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

#ifndef FCMA_HARNESS_HPP_
#define FCMA_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fcma/basis.hpp"
#include "fcma/mediate.hpp"
#include "fcma/pipeline.hpp"
#include "fcma/simgen.hpp"

namespace fcma {

enum class RunMode { Simulate, Oracle, Fit, Mediate, Benchmark };
enum class SpreadReading { Auto, Variance, StdDev };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& name);

// Flat `key = value` run configuration. `[section]` lines are accepted and
// ignored; `#` and `;` start comments; unknown or repeated keys are errors.
// Relative paths resolve against the configuration file's directory.
struct RunConfig {
  std::optional<RunMode> mode;
  ScenarioKind scenario = ScenarioKind::Simple;
  std::filesystem::path subjects;  // fit/mediate input, optional
  std::filesystem::path mediator;
  std::filesystem::path estimates;  // benchmark: external per-replication estimates
  Index n = 1000;
  Index T = 100;
  Index R = 100;
  Index J = 1000;
  Index n_inner = 1;
  BasisKind basis = BasisKind::BSplineCubic;
  int nbasis = 5;
  bool nbasis_by_gcv = false;
  int gcv_min = 4;
  int gcv_max = 15;
  double fpca_threshold = 0.90;
  std::optional<Index> q_override;
  std::uint64_t seed = 20240101;
  SpreadReading covariate_spread = SpreadReading::Auto;
  bool mediator_noise = true;
  bool presmooth = true;
  Index oracle_n = 100000;
  std::filesystem::path out = "fcma_out";
  int jobs = 1;
  double max_failure_share = 0.05;

  void check() const;  // throws ConfigError
};

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string render_config(const RunConfig& cfg);

// Benchmark performance summary for one estimand.
struct MetricsRow {
  double truth = 0.0;
  double bias_pct = 0.0;       // |mean(est) - truth| / |truth| * 100
  double ase = 0.0;            // mean of per-replication standard errors
  double ese = 0.0;            // sample SD of point estimates, divisor R - 1
  double ecp = 0.0;            // % of intervals containing the truth
  bool absolute_bias = false;  // truth == 0: bias_pct holds |mean - truth|
};

struct MetricsTable {
  std::array<MetricsRow, kNumEstimands> rows{};
  Index replications = 0;
};

// Columns of every matrix are estimands; rows are replications. With a zero
// truth the bias is reported on the absolute scale and flagged, unless
// `require_relative` is set, in which case it is a DataError.
MetricsTable compute_metrics(const Matrix& points, const Matrix& ses, const Matrix& ci_low,
                             const Matrix& ci_high, const std::array<double, kNumEstimands>& truth,
                             bool require_relative = false);

std::string metrics_csv(const MetricsTable& table);
// Human-readable table rounded to two or three decimals.
std::string metrics_text(const MetricsTable& table);

struct ReplicationOutcome {
  Index index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  EffectEstimates estimates;
  Index q = 0;
  int zip_iterations = 0;
  // Rendered artifacts of this replication (kept for the first success).
  std::string effects, draws, gcv, fosr_coefs, fpca, outcome_coefs, zipfit;
};

// Per-replication estimates in long CSV form (`r,seed,status,estimand,...`),
// written at 17 significant digits so that replaying them is lossless.
std::string replications_csv(const std::vector<ReplicationOutcome>& reps);
// Reads externally produced estimates with columns r, estimand, point, se,
// ci_low, ci_high (optional `status`; rows with status other than "ok" are
// skipped).
std::vector<ReplicationOutcome> load_replications(const std::filesystem::path& path);

struct BenchmarkResult {
  OracleEffects truth;
  std::optional<SpreadResolution> spread;
  CovariateSpread spread_used = CovariateSpread::StdDev;
  std::vector<ReplicationOutcome> replications;
  MetricsTable metrics;
  Index failures = 0;
};

// Thrown when more than `max_failure_share` of the replications fail.
class FailureBudgetExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

PipelineOptions pipeline_options(const RunConfig& cfg, int nbasis);
MediationOptions mediation_options(const RunConfig& cfg, std::uint64_t seed, int jobs);

// One simulate -> fit -> mediate replication with seed child_seed(seed, r).
ReplicationOutcome run_replication(const RunConfig& cfg, CovariateSpread spread, Index r);

// simulate -> fit -> mediate over R replications, then metrics against the
// oracle truth. Writes all artifacts to cfg.out.
BenchmarkResult run_benchmark(const RunConfig& cfg, std::ostream* log = nullptr);

// Dispatches on cfg.mode and writes that mode's artifacts to cfg.out.
void execute(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace fcma

#endif  // FCMA_HARNESS_HPP_
