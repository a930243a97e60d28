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

#ifndef VAEPROBE_CONFIG_HPP
#define VAEPROBE_CONFIG_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vaeprobe/baselines.hpp"
#include "vaeprobe/datasets.hpp"
#include "vaeprobe/models.hpp"
#include "vaeprobe/probe.hpp"
#include "vaeprobe/training.hpp"

namespace vaeprobe {

struct DatasetConfig {
  enum class Kind { idx, amat };
  Kind kind = Kind::idx;
  std::filesystem::path train_images;
  std::filesystem::path train_labels;  // IDX labels, or an optional sidecar for amat
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  enum class Binarize { none, threshold, stochastic };
  Binarize binarize = Binarize::threshold;
  double threshold = 0.5;
  std::uint64_t binarize_seed = 0;
  int classes = 10;
  std::size_t train_limit = 0;  // 0 = all rows
  std::size_t test_limit = 0;
  double entropy_nats = kMnistEntropyNats;
};

struct SupervisedBaselineConfig {
  SupervisedKind kind = SupervisedKind::simple_fc;
  ProbeConfig schedule{20, 1e-4, 25, 0.1, 32, 1, 0, false};
  ConvTrunkSpec conv;
};

struct BaselineConfig {
  std::size_t pca_k = 30;
  std::vector<double> pca_sigmas{0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0};
  double discard_floor = 0.0;
  RandomEncoderKind random_kind = RandomEncoderKind::fully_connected;
  std::uint64_t random_seed = 0;
  ConvTrunkSpec random_conv;
  SupervisedBaselineConfig supervised;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  VaeSpec model;
  TrainConfig train;
  bool probe_enabled = true;
  ProbeConfig probe;
  BaselineConfig baselines;
  std::filesystem::path output_dir = "runs";
  /// Relative dataset paths resolve against this (the config file's folder).
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  EntropyConstants constants() const;
};

/// Parses a JSON tree (comments allowed), fills defaults, and validates.
/// Errors are ConfigError naming the offending key path, or the line and
/// column for syntax errors.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the fully defaulted tree, keys sorted.
std::string canonical_config(const ExperimentConfig& config, bool include_output = true);
/// 16 hex digits of a content hash of the canonical tree (output excluded,
/// seed included).
std::string run_id(const ExperimentConfig& config);

}  // namespace vaeprobe

#endif  // VAEPROBE_CONFIG_HPP
