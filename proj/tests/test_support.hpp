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

#ifndef VAEPROBE_TEST_SUPPORT_HPP
#define VAEPROBE_TEST_SUPPORT_HPP

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "vaeprobe/datasets.hpp"
#include "vaeprobe/rng.hpp"

namespace vaeprobe::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(fnv1a64(tag) ^ static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)));
    path_ = std::filesystem::temp_directory_path() /
            ("vaeprobe-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(rng.next_u64() % 1000000007ULL));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path mnist_dir() { return VAEPROBE_DATA_DIR; }

inline bool mnist_available() {
  const auto d = mnist_dir();
  for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                        "test-images-idx3-ubyte", "test-labels-idx1-ubyte"}) {
    if (!std::filesystem::exists(d / f)) return false;
  }
  return true;
}

/// Binary images where each class lights up its own block of pixels
/// (with some noise), so labels are learnable from the pixels.
inline DatasetSplit synthetic_binary(std::size_t rows, std::size_t cols, int classes,
                                     std::uint64_t seed, double noise = 0.05) {
  Rng rng(seed);
  DatasetSplit s;
  s.name = "synthetic";
  s.rows = rows;
  s.cols = cols;
  s.images.resize(rows * cols);
  std::vector<int> labels(rows);
  const std::size_t block = cols / static_cast<std::size_t>(classes);
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    labels[i] = y;
    for (std::size_t j = 0; j < cols; ++j) {
      const bool on = j / block == static_cast<std::size_t>(y);
      const bool flip = rng.uniform() < noise;
      s.images[i * cols + j] = (on != flip) ? 1.0f : 0.0f;
    }
  }
  attach_labels(s, std::move(labels), classes);
  return s;
}

}  // namespace vaeprobe::testing

#endif  // VAEPROBE_TEST_SUPPORT_HPP
