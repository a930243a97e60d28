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

#ifndef VAEPROBE_REPORT_HPP
#define VAEPROBE_REPORT_HPP

#include <filesystem>
#include <vector>

#include "vaeprobe/config.hpp"

namespace vaeprobe {

/// Columns of c_vs_r.csv, c_vs_d.csv and baselines.csv.
const std::vector<std::string>& report_columns();

struct ReportSummary {
  std::size_t runs = 0;
  std::size_t pca_points = 0;
  std::size_t baseline_rows = 0;
  std::filesystem::path dir;
};

/// Scans `inputs` (run directories, sweep folders, or any parent) for
/// completed runs and baseline outputs and writes c_vs_r.csv, c_vs_d.csv,
/// pca_frontier.csv, discard_line.csv, baselines.csv and summary.txt into
/// `out`. Output bytes depend only on the inputs and the config.
ReportSummary emit_report(const std::vector<std::filesystem::path>& inputs,
                          const ExperimentConfig& config, const std::filesystem::path& out);

}  // namespace vaeprobe

#endif  // VAEPROBE_REPORT_HPP
