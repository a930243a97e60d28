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

#ifndef VAEPROBE_PARAM_IO_HPP
#define VAEPROBE_PARAM_IO_HPP

#include <filesystem>

#include "vaeprobe/tensor_map.hpp"

namespace vaeprobe {

// Weight file layout (all integers little-endian):
//   "IPW1"
//   u32 tensor count
//   per tensor: u32 name length, UTF-8 name, u32 rank, rank x u32 dims,
//               prod(dims) x f32
void save_params(const std::filesystem::path& path, const TensorMap<float>& params);
TensorMap<float> load_params(const std::filesystem::path& path);
/// Loads and checks names and shapes against `expected` (e.g. a freshly
/// initialized ParamSet for the intended spec).
TensorMap<float> load_params(const std::filesystem::path& path, const TensorMap<float>& expected);

}  // namespace vaeprobe

#endif  // VAEPROBE_PARAM_IO_HPP
