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

#ifndef FCMA_CSV_HPP_
#define FCMA_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fcma::csv {

// Minimal comma-separated reader: no quoting, fields are trimmed, blank lines
// are skipped. Good enough for the numeric tables this project reads and
// writes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line per row

  // Column position by name, or -1.
  int column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
std::vector<std::string> split_line(std::string_view line);
std::string trim(std::string_view s);

// Strict numeric parses: the whole field must be consumed.
bool parse_double(std::string_view field, double& out);
bool parse_int64(std::string_view field, long long& out);

// printf("%.*g") formatting with `digits` significant digits.
std::string format(double value, int digits = 12);

// Writes to `path` through a temporary sibling and an atomic rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace fcma::csv

#endif  // FCMA_CSV_HPP_
