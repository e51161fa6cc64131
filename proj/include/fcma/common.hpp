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

#ifndef FCMA_COMMON_HPP_
#define FCMA_COMMON_HPP_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fcma {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Base of everything the library throws. The CLI maps the concrete kinds
// onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that violates a StudyData invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// Singular systems, failed factorizations, exhausted failure budgets.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Five causal estimands, in the column order used by every draw matrix and
// output file.
enum class Estimand : int { TE = 0, NIE1 = 1, NDE0 = 2, NIE0 = 3, NDE1 = 4 };
inline constexpr int kNumEstimands = 5;

inline const char* estimand_name(int e) {
  static constexpr const char* names[kNumEstimands] = {"te", "nie1", "nde0", "nie0", "nde1"};
  return names[e];
}

}  // namespace fcma

#endif  // FCMA_COMMON_HPP_
