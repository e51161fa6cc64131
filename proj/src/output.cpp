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

#include "fcma/output.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fcma/csv.hpp"

namespace fcma {

namespace {

std::string num(double v) { return csv::format(v, 12); }

}  // namespace

std::string effects_csv(const EffectEstimates& est) {
  std::ostringstream out;
  out << "estimand,point,se,ci_low,ci_high\n";
  for (int e = 0; e < kNumEstimands; ++e) {
    const auto& s = est.effects[e];
    out << estimand_name(e) << ',' << num(s.point) << ',' << num(s.se) << ',' << num(s.ci_low)
        << ',' << num(s.ci_high) << '\n';
  }
  return out.str();
}

std::string draws_csv(const EffectDraws& draws) {
  std::ostringstream out;
  out << "j,te,nie1,nde0,nie0,nde1\n";
  for (Index j = 0; j < draws.draws(); ++j) {
    out << j + 1;
    for (int e = 0; e < kNumEstimands; ++e) out << ',' << num(draws.values(j, e));
    out << '\n';
  }
  return out.str();
}

std::string oracle_csv(const OracleEffects& oracle) {
  std::ostringstream out;
  out << "estimand,value,mc_se\n";
  for (int e = 0; e < kNumEstimands; ++e) {
    out << estimand_name(e) << ',' << num(oracle.value[e]) << ',' << num(oracle.mc_se[e]) << '\n';
  }
  return out.str();
}

std::string gcv_csv(const GcvResult& gcv) {
  std::ostringstream out;
  out << "nbasis,gcv\n";
  for (std::size_t k = 0; k < gcv.nbasis.size(); ++k) {
    out << gcv.nbasis[k] << ',' << num(gcv.scores[k]) << '\n';
  }
  return out.str();
}

std::string fosr_coefs_csv(const FosrFit& fit) {
  const Matrix curves = fit.coefficient_curves();
  std::ostringstream out;
  out << "t,beta0,beta1";
  for (Index k = 2; k < curves.cols(); ++k) out << ",beta2_" << k - 1;
  out << '\n';
  for (Index j = 0; j < curves.rows(); ++j) {
    out << num(fit.grid[j]);
    for (Index k = 0; k < curves.cols(); ++k) out << ',' << num(curves(j, k));
    out << '\n';
  }
  return out.str();
}

std::string fpca_csv(const FpcaBasis& fb, Index q) {
  std::ostringstream out;
  out << "t,mu";
  for (Index k = 1; k <= q; ++k) out << ",v" << k;
  out << '\n';
  for (Index j = 0; j < fb.grid.size(); ++j) {
    out << num(fb.grid[j]) << ',' << num(fb.mean[j]);
    for (Index k = 0; k < q; ++k) out << ',' << num(fb.eigenfunctions(k, j));
    out << '\n';
  }
  return out.str();
}

std::string outcome_coefs_csv(const ZipFit& fit, const FpcaBasis& fb, Index q) {
  const Matrix curves = outcome_coefficient_curves(fit, fb, q);
  std::ostringstream out;
  out << "t,alpha1,gamma1\n";
  for (Index j = 0; j < curves.rows(); ++j) {
    out << num(fb.grid[j]) << ',' << num(curves(j, 0)) << ',' << num(curves(j, 1)) << '\n';
  }
  return out.str();
}

std::string zipfit_csv(const ZipFit& fit) {
  const Vector se = fit.standard_errors();
  const Index w = fit.alpha.size();
  std::ostringstream out;
  out << "part,term,estimate,se\n";
  for (Index k = 0; k < 2 * w; ++k) {
    const bool zero = k < w;
    const auto& label = fit.labels[static_cast<std::size_t>(zero ? k : k - w)];
    out << (zero ? "zero" : "count") << ',' << label << ',' << num(fit.theta[k]) << ','
        << num(se[k]) << '\n';
  }
  return out.str();
}

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<double>& x,
                          const std::vector<Series>& series) {
  constexpr double width = 640, height = 420;
  constexpr double left = 70, right = 150, top = 40, bottom = 55;
  constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (const auto& s : series) {
      if (i < s.values.size() && std::isfinite(s.values[i]) && std::isfinite(x[i])) {
        xmin = std::min(xmin, x[i]);
        xmax = std::max(xmax, x[i]);
        ymin = std::min(ymin, s.values[i]);
        ymax = std::max(ymax, s.values[i]);
      }
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
        << csv::format(xv, 3) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << csv::format(yv, 3) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[s].values.size(); ++i) {
      if (!std::isfinite(series[s].values[i])) continue;
      out << csv::format(px(x[i]), 6) << ',' << csv::format(py(series[s].values[i]), 6) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << series[s].name
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_curve_files(const std::filesystem::path& dir, const std::string& stem,
                       const std::string& csv_text, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  csv::write_atomic(dir / (stem + ".csv"), csv_text);
  std::istringstream in(csv_text);
  std::string line;
  std::getline(in, line);
  const auto header = csv::split_line(line);
  std::vector<double> x;
  std::vector<Series> series;
  for (std::size_t c = 1; c < header.size(); ++c) series.push_back({header[c], {}});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    double v = 0.0;
    csv::parse_double(fields[0], v);
    x.push_back(v);
    for (std::size_t c = 1; c < fields.size() && c <= series.size(); ++c) {
      double y = std::numeric_limits<double>::quiet_NaN();
      if (!csv::parse_double(fields[c], y)) y = std::numeric_limits<double>::quiet_NaN();
      series[c - 1].values.push_back(y);
    }
  }
  csv::write_atomic(dir / (stem + ".svg"), svg_line_plot(title, x_label, y_label, x, series));
}

}  // namespace fcma
