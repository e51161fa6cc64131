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

#ifndef FCMA_OUTPUT_HPP_
#define FCMA_OUTPUT_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fcma/basis.hpp"
#include "fcma/fosr.hpp"
#include "fcma/fpca.hpp"
#include "fcma/mediate.hpp"
#include "fcma/simgen.hpp"
#include "fcma/zip.hpp"

namespace fcma {

// CSV renderers. Numbers carry 12 significant digits.
std::string effects_csv(const EffectEstimates& est);
std::string draws_csv(const EffectDraws& draws);
std::string oracle_csv(const OracleEffects& oracle);
std::string gcv_csv(const GcvResult& gcv);
std::string fosr_coefs_csv(const FosrFit& fit);
std::string fpca_csv(const FpcaBasis& fb, Index q);
std::string outcome_coefs_csv(const ZipFit& fit, const FpcaBasis& fb, Index q);
std::string zipfit_csv(const ZipFit& fit);

struct Series {
  std::string name;
  std::vector<double> values;
};

// Standalone SVG line chart: one polyline per series, labeled axes and a
// legend. Non-finite points are skipped.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<double>& x,
                          const std::vector<Series>& series);

// Writes `<stem>.csv` and `<stem>.svg` for a column table whose first
// column is the x axis.
void write_curve_files(const std::filesystem::path& dir, const std::string& stem,
                       const std::string& csv, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

}  // namespace fcma

#endif  // FCMA_OUTPUT_HPP_
