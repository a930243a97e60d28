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

#include "vaeprobe/datasets.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vaeprobe/errors.hpp"
#include "vaeprobe/rng.hpp"

namespace vaeprobe {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > buf.size()) throw DataError(path.string() + ": truncated IDX header");
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

void check_magic(std::uint32_t magic, std::uint32_t expected, const std::filesystem::path& path) {
  if (magic == expected) return;
  std::ostringstream msg;
  msg << path.string() << ": unrecognized IDX magic 0x" << std::hex << magic;
  throw DataError(msg.str());
}

}  // namespace

bool DatasetSplit::is_binary() const {
  return std::all_of(images.begin(), images.end(), [](float v) { return v == 0.0f || v == 1.0f; });
}

Tensor DatasetSplit::gather(std::span<const std::size_t> indices) const {
  Tensor out(Shape{indices.size(), cols});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows) throw DataError("row index out of range");
    std::copy_n(images.data() + indices[i] * cols, cols, out.ptr() + i * cols);
  }
  return out;
}

std::vector<int> DatasetSplit::gather_labels(std::span<const std::size_t> indices) const {
  if (!labels) throw DataError("split '" + name + "' has no labels");
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = (*labels).at(indices[i]);
  return out;
}

DatasetSplit DatasetSplit::head(std::size_t count) const {
  DatasetSplit out = *this;
  out.rows = std::min(count, rows);
  out.images.resize(out.rows * cols);
  if (out.labels) out.labels->resize(out.rows);
  return out;
}

void DatasetSplit::validate(bool require_binary) const {
  if (images.size() != rows * cols) throw DataError(name + ": image buffer does not match N x D");
  for (float v : images) {
    if (!(v >= 0.0f && v <= 1.0f)) throw DataError(name + ": pixel value outside [0,1]");
  }
  if (require_binary && !is_binary()) throw DataError(name + ": expected binary pixels");
  if (labels) {
    if (labels->size() != rows) throw DataError(name + ": label count does not match rows");
    for (int y : *labels) {
      if (y < 0 || y >= class_count) {
        throw DataError(name + ": label " + std::to_string(y) + " outside [0," +
                        std::to_string(class_count) + ")");
      }
    }
  }
}

DatasetSplit load_idx_images(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  check_magic(read_be32(buf, 0, path), kIdxImagesMagic, path);
  const std::size_t n = read_be32(buf, 4, path);
  const std::size_t h = read_be32(buf, 8, path);
  const std::size_t w = read_be32(buf, 12, path);
  if (n == 0 || h == 0 || w == 0) throw DataError(path.string() + ": zero IDX dimension");
  const std::size_t expected = 16 + n * h * w;
  if (buf.size() < expected) throw DataError(path.string() + ": truncated IDX image data");
  if (buf.size() > expected) throw DataError(path.string() + ": IDX dimensions do not match file size");

  DatasetSplit split;
  split.name = path.filename().string();
  split.rows = n;
  split.cols = h * w;
  split.images.resize(n * h * w);
  for (std::size_t i = 0; i < split.images.size(); ++i) {
    split.images[i] = static_cast<float>(buf[16 + i]) / 255.0f;
  }
  return split;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  check_magic(read_be32(buf, 0, path), kIdxLabelsMagic, path);
  const std::size_t n = read_be32(buf, 4, path);
  if (buf.size() < 8 + n) throw DataError(path.string() + ": truncated IDX label data");
  if (buf.size() > 8 + n) throw DataError(path.string() + ": IDX dimensions do not match file size");
  return std::vector<int>(buf.begin() + 8, buf.end());
}

DatasetSplit load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                      int class_count) {
  DatasetSplit split = load_idx_images(images);
  attach_labels(split, load_idx_labels(labels), class_count);
  return split;
}

void write_idx_images(const std::filesystem::path& path, const DatasetSplit& split,
                      std::size_t height, std::size_t width) {
  if (height * width != split.cols) throw ShapeError("write_idx_images: height*width != D");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  put_be32(out, kIdxImagesMagic);
  put_be32(out, static_cast<std::uint32_t>(split.rows));
  put_be32(out, static_cast<std::uint32_t>(height));
  put_be32(out, static_cast<std::uint32_t>(width));
  for (float v : split.images) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f))));
  }
}

void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  put_be32(out, kIdxLabelsMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int y : labels) out.put(static_cast<char>(static_cast<unsigned char>(y)));
}

DatasetSplit load_amat(const std::filesystem::path& path, std::size_t expected_cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  DatasetSplit split;
  split.name = path.filename().string();
  split.cols = expected_cols;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      double v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (v != 0.0 && v != 1.0)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-binary value");
      }
      split.images.push_back(static_cast<float>(v));
      ++count;
      p = next;
    }
    if (count != expected_cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(expected_cols) + " columns, got " + std::to_string(count));
    }
    ++split.rows;
  }
  return split;
}

void write_amat(const std::filesystem::path& path, const DatasetSplit& split) {
  if (!split.is_binary()) throw DataError("write_amat: split is not binary");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::string line;
  for (std::size_t r = 0; r < split.rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < split.cols; ++c) {
      if (c) line += ' ';
      line += split.images[r * split.cols + c] == 1.0f ? '1' : '0';
    }
    line += '\n';
    out << line;
  }
}

std::vector<int> load_label_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    int y = 0;
    auto [p, ec] = std::from_chars(line.data() + first, line.data() + last + 1, y);
    if (ec != std::errc() || p != line.data() + last + 1) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": not an integer label");
    }
    labels.push_back(y);
  }
  return labels;
}

void write_label_sidecar(const std::filesystem::path& path, std::span<const int> labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (int y : labels) out << y << '\n';
}

void attach_labels(DatasetSplit& split, std::vector<int> labels, int class_count) {
  if (labels.size() != split.rows) {
    throw DataError(split.name + ": " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(split.rows) + " rows");
  }
  split.labels = std::move(labels);
  split.class_count = class_count;
  split.validate(false);
}

DatasetSplit binarize(const DatasetSplit& split, const BinarizeMode& mode) {
  DatasetSplit out = split;
  for (float v : split.images) {
    if (!(v >= 0.0f && v <= 1.0f)) throw DataError("binarize: value outside [0,1]");
  }
  if (mode.kind == BinarizeMode::Kind::threshold) {
    for (auto& v : out.images) v = v >= mode.threshold ? 1.0f : 0.0f;
  } else {
    Rng rng(mode.seed);
    for (auto& v : out.images) v = rng.uniform() < v ? 1.0f : 0.0f;
  }
  return out;
}

std::vector<std::vector<std::size_t>> iterate_batches(std::size_t count, std::size_t batch_size,
                                                      std::uint64_t shuffle_seed,
                                                      std::uint64_t epoch) {
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(shuffle_seed).derive(epoch);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t stop = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

std::vector<std::vector<std::size_t>> sequential_batches(std::size_t count,
                                                         std::size_t batch_size) {
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    std::vector<std::size_t> b(std::min(count, start + batch_size) - start);
    std::iota(b.begin(), b.end(), start);
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace vaeprobe
