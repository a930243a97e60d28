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

#ifndef VAEPROBE_HARNESS_HPP
#define VAEPROBE_HARNESS_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vaeprobe/config.hpp"
#include "vaeprobe/csv.hpp"

namespace vaeprobe {

std::string tool_version();

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitData = 2, kExitAborted = 3 };

struct ExperimentData {
  DatasetSplit train;
  DatasetSplit test;
};

/// Loads, binarizes and truncates both splits as configured.
ExperimentData load_experiment_data(const ExperimentConfig& config);

struct RunOptions {
  bool force = false;
};

/// Final state of one run directory as read back from disk.
struct RunRecord {
  std::string run_id;
  std::filesystem::path dir;
  std::string status;  // completed | aborted-nan | failed
  std::string diagnostic;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> final_row;  // last metrics.csv row, empty if none
  bool skipped = false;                // already complete; nothing was recomputed
};

/// Header of metrics.csv.
const std::vector<std::string>& metrics_columns();

/// Trains, probes, and writes <output_dir>/<run_id>/{manifest.json,
/// metrics.csv, weights.ipw, probe.csv}. A completed run is left untouched
/// unless `force`.
RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options = {});
RunRecord run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                         const RunOptions& options);
RunRecord read_run(const std::filesystem::path& dir);

/// Retrains the probe of an existing run from its saved weights and
/// rewrites probe.csv.
ProbeResult reprobe_run(const ExperimentConfig& config, const std::filesystem::path& run_dir);

struct SweepResult {
  std::string sweep_id;
  std::filesystem::path dir;  // holds sweep.csv
  std::vector<RunRecord> runs;
};

/// The Cartesian product betas x seeds as independent runs on up to
/// `threads` workers. sweep.csv lists runs in (beta, seed) input order.
SweepResult sweep(const ExperimentConfig& base, std::span<const double> betas,
                  std::span<const std::uint64_t> seeds, std::size_t threads,
                  const RunOptions& options = {});

/// Baseline runs; each writes into <output_dir>/baselines/<name>-<hash>/.
std::filesystem::path run_pca_baseline(const ExperimentConfig& config, const ExperimentData& data);
std::filesystem::path run_random_encoder_baseline(const ExperimentConfig& config,
                                                  const ExperimentData& data);
std::filesystem::path run_supervised_baseline(const ExperimentConfig& config,
                                              const ExperimentData& data);
std::filesystem::path run_discard_line(const ExperimentConfig& config);

/// discard_line.csv content: `points` rates from 0 to H_X.
CsvTable discard_line_table(const ExperimentConfig& config, std::size_t points = 100);

}  // namespace vaeprobe

#endif  // VAEPROBE_HARNESS_HPP
