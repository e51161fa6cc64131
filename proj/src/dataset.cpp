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

#include "fcma/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fcma/csv.hpp"

namespace fcma {

Matrix StudyData::design() const {
  const Index p = covariates.cols();
  Matrix z(n(), p + 2);
  z.col(0).setOnes();
  z.col(1) = treatment.cast<double>();
  if (p > 0) z.rightCols(p) = covariates;
  return z;
}

Vector StudyData::design_row(Index i, int a) const {
  const Index p = covariates.cols();
  Vector z(p + 2);
  z[0] = 1.0;
  z[1] = static_cast<double>(a);
  if (p > 0) z.tail(p) = covariates.row(i).transpose();
  return z;
}

std::vector<std::string> StudyData::design_labels() const {
  std::vector<std::string> labels{"intercept", "treatment"};
  labels.insert(labels.end(), covariate_names.begin(), covariate_names.end());
  return labels;
}

bool operator==(const StudyData& a, const StudyData& b) {
  return a.subject_ids == b.subject_ids && a.covariate_names == b.covariate_names &&
         a.treatment == b.treatment && a.outcome == b.outcome &&
         a.covariates.rows() == b.covariates.rows() && a.covariates.cols() == b.covariates.cols() &&
         a.covariates == b.covariates && a.grid.size() == b.grid.size() && a.grid == b.grid &&
         a.mediator.rows() == b.mediator.rows() && a.mediator.cols() == b.mediator.cols() &&
         a.mediator == b.mediator;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& e : errors) {
    if (e.row >= 0) out << "row " << e.row + 1 << ": ";
    out << e.field << ": " << e.message << '\n';
  }
  return out.str();
}

Vector rescale_unit_interval(const Vector& times) {
  if (times.size() < 2) return Vector::Zero(times.size());
  const double lo = times.minCoeff();
  const double hi = times.maxCoeff();
  Vector out = (times.array() - lo) / (hi - lo);
  out[0] = 0.0;
  out[out.size() - 1] = 1.0;
  return out;
}

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + " line " + std::to_string(line) + ": ";
}

}  // namespace

SubjectTable load_subjects(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const int id_col = table.column("id");
  const int a_col = table.column("treatment");
  const int y_col = table.column("outcome");
  for (const auto& [col, name] :
       {std::pair{id_col, "id"}, std::pair{a_col, "treatment"}, std::pair{y_col, "outcome"}}) {
    if (col < 0)
      throw DataError(path.filename().string() + ": missing required column '" + name + "'");
  }
  std::vector<int> cov_cols;
  SubjectTable out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == id_col || ci == a_col || ci == y_col) continue;
    if (table.header[c].empty()) throw DataError(path.filename().string() + ": empty column name");
    cov_cols.push_back(ci);
    out.covariate_names.push_back(table.header[c]);
  }

  const Index n = static_cast<Index>(table.rows.size());
  out.treatment.resize(n);
  out.outcome.resize(n);
  out.covariates.resize(n, static_cast<Index>(cov_cols.size()));
  std::unordered_set<std::string> seen;
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const auto at = where(path, table.line_numbers[i]);
    const auto& id = row[id_col];
    if (id.empty()) throw DataError(at + "missing id");
    if (!seen.insert(id).second) throw DataError(at + "duplicate id '" + id + "'");
    out.ids.push_back(id);

    double a = 0.0;
    if (!csv::parse_double(row[a_col], a) || (a != 0.0 && a != 1.0)) {
      throw DataError(at + "non-binary treatment '" + row[a_col] + "'");
    }
    out.treatment[i] = static_cast<int>(a);

    double y = 0.0;
    if (!csv::parse_double(row[y_col], y) || !std::isfinite(y)) {
      throw DataError(at + "missing or non-numeric outcome '" + row[y_col] + "'");
    }
    if (y < 0.0) throw DataError(at + "negative outcome");
    if (y != std::floor(y) || y > 2.0e9) throw DataError(at + "non-integer outcome");
    out.outcome[i] = static_cast<int>(y);

    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      double x = 0.0;
      if (!csv::parse_double(row[cov_cols[k]], x) || !std::isfinite(x)) {
        throw DataError(at + "missing or non-numeric covariate '" + out.covariate_names[k] + "'");
      }
      out.covariates(i, static_cast<Index>(k)) = x;
    }
  }
  return out;
}

MediatorTable load_mediator_long(const std::filesystem::path& path,
                                 const std::vector<std::string>& ids) {
  const auto table = csv::read(path);
  const int id_col = table.column("id");
  const int t_col = table.column("time");
  const int v_col = table.column("value");
  if (id_col < 0 || t_col < 0 || v_col < 0) {
    throw DataError(path.filename().string() + ": header must contain id,time,value");
  }
  std::unordered_map<std::string, Index> index_of;
  for (std::size_t i = 0; i < ids.size(); ++i) index_of.emplace(ids[i], static_cast<Index>(i));

  std::vector<std::map<double, double>> per_subject(ids.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto at = where(path, table.line_numbers[r]);
    const auto it = index_of.find(row[id_col]);
    if (it == index_of.end()) throw DataError(at + "unknown id '" + row[id_col] + "'");
    double t = 0.0;
    double v = 0.0;
    if (!csv::parse_double(row[t_col], t) || !std::isfinite(t)) {
      throw DataError(at + "missing or non-numeric time");
    }
    if (!csv::parse_double(row[v_col], v) || !std::isfinite(v)) {
      throw DataError(at + "missing mediator value");
    }
    if (!per_subject[it->second].emplace(t, v).second) {
      throw DataError(at + "duplicate (id,time) for '" + row[id_col] + "'");
    }
  }

  std::set<double> all_times;
  for (const auto& m : per_subject) {
    for (const auto& [t, v] : m) all_times.insert(t);
  }
  const Index num_t = static_cast<Index>(all_times.size());
  MediatorTable out;
  out.raw_times.resize(num_t);
  Index j = 0;
  for (double t : all_times) out.raw_times[j++] = t;
  out.grid = rescale_unit_interval(out.raw_times);
  out.values.resize(static_cast<Index>(ids.size()), num_t);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& m = per_subject[i];
    if (static_cast<Index>(m.size()) != num_t) {
      throw DataError(path.filename().string() + ": ragged grid: subject '" + ids[i] + "' has " +
                      std::to_string(m.size()) + " of " + std::to_string(num_t) + " time points");
    }
    Index k = 0;
    for (const auto& [t, v] : m) out.values(static_cast<Index>(i), k++) = v;
  }
  return out;
}

StudyData load_study(const std::filesystem::path& subjects, const std::filesystem::path& mediator) {
  auto s = load_subjects(subjects);
  auto m = load_mediator_long(mediator, s.ids);
  StudyData study{std::move(s.ids),        std::move(s.treatment),
                  std::move(s.covariates), std::move(s.covariate_names),
                  std::move(s.outcome),    std::move(m.grid),
                  std::move(m.values)};
  const auto report = validate(study);
  if (!report.ok()) throw DataError("dataset failed validation:\n" + report.summary());
  return study;
}

ValidationReport validate(const StudyData& s) {
  ValidationReport report;
  auto error = [&](Index row, std::string field, std::string msg) {
    report.errors.push_back({row, std::move(field), std::move(msg)});
  };
  const Index n = s.n();
  if (s.treatment.size() != n) error(-1, "treatment", "length differs from number of subjects");
  if (s.outcome.size() != n) error(-1, "outcome", "length differs from number of subjects");
  if (s.covariates.rows() != n)
    error(-1, "covariates", "row count differs from number of subjects");
  if (static_cast<Index>(s.covariate_names.size()) != s.covariates.cols()) {
    error(-1, "covariates", "column names do not match column count");
  }
  if (s.mediator.rows() != n) error(-1, "mediator", "row count differs from number of subjects");
  if (s.mediator.cols() != s.grid.size())
    error(-1, "mediator", "column count differs from grid length");
  if (!report.ok()) return report;

  std::unordered_set<std::string> seen;
  for (Index i = 0; i < n; ++i) {
    if (!seen.insert(s.subject_ids[i]).second) error(i, "id", "duplicate id");
    if (s.treatment[i] != 0 && s.treatment[i] != 1) error(i, "treatment", "non-binary treatment");
    if (s.outcome[i] < 0) error(i, "outcome", "negative outcome");
    if (!s.covariates.row(i).allFinite()) error(i, "covariates", "non-finite covariate");
    if (!s.mediator.row(i).allFinite())
      error(i, "mediator", "missing or non-finite mediator value");
  }
  const Index t = s.grid.size();
  if (t == 0) error(-1, "grid", "empty grid");
  for (Index j = 1; j < t; ++j) {
    if (!(s.grid[j] > s.grid[j - 1])) {
      error(-1, "grid", "grid not increasing");
      break;
    }
  }
  if (t > 0 && (!(s.grid[0] >= 0.0) || !(s.grid[t - 1] <= 1.0))) {
    error(-1, "grid", "grid outside [0,1]");
  }
  if (n > 0) {
    const Index treated = s.treatment.sum();
    if (treated == 0 || treated == n) report.warnings.push_back("treatment is constant");
    if ((s.outcome.array() == 0).all()) report.warnings.push_back("all outcomes are zero");
  }
  return report;
}

void write_subjects(const StudyData& s, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "id,treatment,outcome";
  for (const auto& name : s.covariate_names) out << ',' << name;
  out << '\n';
  for (Index i = 0; i < s.n(); ++i) {
    out << s.subject_ids[i] << ',' << s.treatment[i] << ',' << s.outcome[i];
    for (Index k = 0; k < s.covariates.cols(); ++k)
      out << ',' << csv::format(s.covariates(i, k), 17);
    out << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_mediator_long(const StudyData& s, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "id,time,value\n";
  for (Index i = 0; i < s.n(); ++i) {
    for (Index j = 0; j < s.grid.size(); ++j) {
      out << s.subject_ids[i] << ',' << csv::format(s.grid[j], 17) << ','
          << csv::format(s.mediator(i, j), 17) << '\n';
    }
  }
  csv::write_atomic(path, out.str());
}

}  // namespace fcma
