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

#ifndef FCMA_DATASET_HPP_
#define FCMA_DATASET_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "fcma/common.hpp"

namespace fcma {

// One study: per-subject treatment, covariates and count outcome, plus a
// mediator curve per subject observed on a shared grid in [0, 1].
struct StudyData {
  std::vector<std::string> subject_ids;
  IntVector treatment;                       // n, values in {0, 1}
  Matrix covariates;                         // n x p, p may be 0
  std::vector<std::string> covariate_names;  // p, file order
  IntVector outcome;                         // n, nonnegative counts
  Vector grid;                               // T, strictly increasing in [0, 1]
  Matrix mediator;                           // n x T

  Index n() const { return static_cast<Index>(subject_ids.size()); }
  Index num_covariates() const { return covariates.cols(); }
  Index num_timepoints() const { return grid.size(); }

  // Design matrix Z = [1, A, X], the column order used by every model.
  Matrix design() const;
  // Row of Z for subject i with the treatment replaced by `a`.
  Vector design_row(Index i, int a) const;
  // Labels of the columns of Z: intercept, treatment, covariate names.
  std::vector<std::string> design_labels() const;
};

bool operator==(const StudyData& a, const StudyData& b);

struct ValidationIssue {
  Index row;  // -1 when the issue is not tied to a subject row
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
  std::string summary() const;
};

struct SubjectTable {
  std::vector<std::string> ids;
  IntVector treatment;
  IntVector outcome;
  Matrix covariates;
  std::vector<std::string> covariate_names;
};

struct MediatorTable {
  Vector grid;       // rescaled to [0, 1]
  Vector raw_times;  // sorted unique times as read
  Matrix values;     // rows in the order of the requested ids
};

// `id,treatment,outcome,<cov>...`. Throws DataError on missing required
// columns, non-binary treatment, negative or non-integer outcome, duplicate
// ids, and missing values.
SubjectTable load_subjects(const std::filesystem::path& path);

// Long format `id,time,value`. Every subject must carry the identical time
// set. Times are rescaled by (t - t_min) / (t_max - t_min).
MediatorTable load_mediator_long(const std::filesystem::path& path,
                                 const std::vector<std::string>& ids);

// Loads both files and validates the result; throws DataError with the
// validation summary when the report has errors.
StudyData load_study(const std::filesystem::path& subjects, const std::filesystem::path& mediator);

ValidationReport validate(const StudyData& study);

// Writers use 17 significant digits so that load(write(s)) == s whenever the
// grid already spans [0, 1].
void write_subjects(const StudyData& study, const std::filesystem::path& path);
void write_mediator_long(const StudyData& study, const std::filesystem::path& path);

// Affine map of strictly increasing times onto [0, 1]. A single time maps to 0.
Vector rescale_unit_interval(const Vector& times);

}  // namespace fcma

#endif  // FCMA_DATASET_HPP_
