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

#include "vaeprobe/param_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "vaeprobe/errors.hpp"

namespace vaeprobe {

static_assert(std::endian::native == std::endian::little, "weight files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'I', 'P', 'W', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}

  void read(void* dst, std::size_t n) {
    if (pos_ + n > buf_.size()) throw DataError(path_ + ": truncated weight file");
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    read(&v, 4);
    return v;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_params(const std::filesystem::path& path, const TensorMap<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.size() * 4));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

TensorMap<float> load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());

  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError(path.string() + ": bad magic (expected IPW1)");
  const std::uint32_t count = r.u32();
  TensorMap<float> params;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.u32(), '\0');
    r.read(name.data(), name.size());
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) throw DataError(path.string() + ": bad rank for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    std::vector<float> data(shape_size(shape));
    r.read(data.data(), data.size() * 4);
    params.insert(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw DataError(path.string() + ": trailing bytes after last tensor");
  return params;
}

TensorMap<float> load_params(const std::filesystem::path& path, const TensorMap<float>& expected) {
  TensorMap<float> params = load_params(path);
  for (const auto& [name, t] : expected) {
    if (!params.contains(name)) throw ShapeError("weight file is missing tensor '" + name + "'");
    if (params.at(name).shape() != t.shape()) {
      throw ShapeError("shape mismatch for tensor '" + name + "': file has " +
                       shape_string(params.at(name).shape()) + ", spec expects " +
                       shape_string(t.shape()));
    }
  }
  for (const auto& [name, t] : params) {
    if (!expected.contains(name)) throw ShapeError("unexpected tensor '" + name + "' in weight file");
  }
  return params;
}

}  // namespace vaeprobe
