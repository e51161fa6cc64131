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

// fcma command-line entry point.
//
//   fcma <simulate|oracle|fit|mediate|benchmark> --config run.cfg [--seed S] [--out DIR] [--jobs N]
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration error,
// 3 data validation error, 4 numerical failure (including an exceeded
// replication failure budget).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fcma/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Functional mediation analysis with a zero-inflated count outcome"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
  bool quiet = false;

  const char* modes[] = {"simulate", "oracle", "fit", "mediate", "benchmark"};
  const char* blurbs[] = {"generate one simulated dataset", "Monte Carlo truth for a scenario",
                          "fit the mediator and outcome models",
                          "fit the models and estimate the effects",
                          "replicated simulation study with coverage metrics"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(modes[i], blurbs[i]);
    sub->add_option("--config,-c", config_path, "run configuration file")->required();
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--out", out, "output directory override");
    sub->add_option("--jobs", jobs, "worker threads override")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet,-q", quiet, "suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fcma::RunConfig cfg = fcma::load_config(config_path);
    const fcma::RunMode mode = fcma::parse_run_mode(app.get_subcommands().front()->get_name());
    if (cfg.mode && *cfg.mode != mode)
      std::cerr << "fcma: config mode '" << fcma::to_string(*cfg.mode) << "' overridden by '"
                << fcma::to_string(mode) << "'\n";
    cfg.mode = mode;
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (jobs) cfg.jobs = *jobs;
    fcma::execute(cfg, quiet ? nullptr : &std::cerr);
  } catch (const fcma::ConfigError& e) {
    std::cerr << "fcma: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const fcma::DataError& e) {
    std::cerr << "fcma: data error: " << e.what() << '\n';
    return 3;
  } catch (const fcma::NumericalError& e) {
    std::cerr << "fcma: numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "fcma: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
