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

#ifndef VAEPROBE_DATASETS_HPP
#define VAEPROBE_DATASETS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vaeprobe/tensor.hpp"

namespace vaeprobe {

/// N x D images in [0,1] with optional labels in [0, class_count).
struct DatasetSplit {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> images;
  std::optional<std::vector<int>> labels;
  int class_count = 0;

  std::span<const float> image(std::size_t i) const {
    return std::span<const float>(images).subspan(i * cols, cols);
  }
  bool is_binary() const;
  /// Copies the selected rows into a [indices.size(), cols] tensor.
  Tensor gather(std::span<const std::size_t> indices) const;
  std::vector<int> gather_labels(std::span<const std::size_t> indices) const;
  /// First `count` rows (or all, if fewer).
  DatasetSplit head(std::size_t count) const;
  /// Throws DataError if the invariants (binary/labels in range) are violated.
  void validate(bool require_binary) const;
};

DatasetSplit load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path);
/// Images and labels from a pair of IDX files; labels must align.
DatasetSplit load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                      int class_count = 10);
void write_idx_images(const std::filesystem::path& path, const DatasetSplit& split,
                      std::size_t height, std::size_t width);
void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels);

/// One example per line, whitespace-separated 0/1 values; every line must
/// have `expected_cols` values.
DatasetSplit load_amat(const std::filesystem::path& path, std::size_t expected_cols = 784);
void write_amat(const std::filesystem::path& path, const DatasetSplit& split);

/// One integer per line.
std::vector<int> load_label_sidecar(const std::filesystem::path& path);
void write_label_sidecar(const std::filesystem::path& path, std::span<const int> labels);
/// Attaches labels to a split (count must match, values in [0, class_count)).
void attach_labels(DatasetSplit& split, std::vector<int> labels, int class_count);

struct BinarizeMode {
  enum class Kind { threshold, stochastic };
  Kind kind = Kind::threshold;
  double threshold = 0.5;  // x >= threshold -> 1
  std::uint64_t seed = 0;  // stochastic: x -> Bernoulli(x)

  static BinarizeMode thresholded(double t = 0.5) { return {Kind::threshold, t, 0}; }
  static BinarizeMode sampled(std::uint64_t seed) { return {Kind::stochastic, 0.5, seed}; }
};

DatasetSplit binarize(const DatasetSplit& split, const BinarizeMode& mode);

/// Minibatch order for one epoch: a Fisher-Yates shuffle drawn from
/// (seed, epoch), cut into batches of `batch_size`; the last batch may be
/// short.
std::vector<std::vector<std::size_t>> iterate_batches(std::size_t count, std::size_t batch_size,
                                                      std::uint64_t shuffle_seed,
                                                      std::uint64_t epoch = 0);
/// Same, without shuffling.
std::vector<std::vector<std::size_t>> sequential_batches(std::size_t count,
                                                         std::size_t batch_size);

}  // namespace vaeprobe

#endif  // VAEPROBE_DATASETS_HPP
