/*
 * Copyright 2026 The vaeprobe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VAEPROBE_CSV_HPP
#define VAEPROBE_CSV_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vaeprobe {

/// Six significant digits ("%.6g"); "nan", "inf", "-inf" for non-finite.
std::string format_number(double value);
/// Empty cell when absent.
std::string format_number(const std::optional<double>& value);
std::optional<double> parse_number(const std::string& cell);

/// Plain comma-separated table; cells never contain commas or quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws DataError naming the column.
  std::size_t column(const std::string& name) const;
  std::string to_string() const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace vaeprobe

#endif  // VAEPROBE_CSV_HPP
