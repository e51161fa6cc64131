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

#ifndef FCMA_TESTS_SUPPORT_HPP_
#define FCMA_TESTS_SUPPORT_HPP_

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fcma/common.hpp"
#include "fcma/dataset.hpp"
#include "fcma/random.hpp"

namespace fcma::testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fcma_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI and returns its exit status.
inline int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FCMA_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small study with one covariate on an even grid; mediator values are i.i.d.
// standard normal unless overwritten.
inline StudyData toy_study(Index n, Index t, std::uint64_t seed) {
  Rng rng(seed);
  StudyData s;
  s.grid = Vector::LinSpaced(t, 0.0, 1.0);
  s.covariate_names = {"x"};
  s.treatment.resize(n);
  s.covariates.resize(n, 1);
  s.outcome.resize(n);
  s.mediator.resize(n, t);
  for (Index i = 0; i < n; ++i) {
    s.subject_ids.push_back("s" + std::to_string(i + 1));
    s.treatment[i] = static_cast<int>(i % 2);
    s.covariates(i, 0) = standard_normal(rng, 1)[0];
    s.outcome[i] = static_cast<int>(i % 3);
    s.mediator.row(i) = standard_normal(rng, t).transpose();
  }
  return s;
}

}  // namespace fcma::testing

#endif  // FCMA_TESTS_SUPPORT_HPP_
