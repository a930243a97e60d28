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

#ifndef VAEPROBE_RNG_HPP
#define VAEPROBE_RNG_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>

#include "vaeprobe/tensor.hpp"

namespace vaeprobe {

/// Deterministic random source.
///
/// The bit generator is std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. Everything layered on top is implemented here rather
/// than with <random> distributions, whose algorithms are unspecified:
///   uniform()       = (u64 >> 11) * 2^-53, in [0, 1)
///   below(n)        = Lemire multiply-shift with rejection
///   gaussian()      = Box-Muller on (1 - uniform(), uniform()); the sine
///                     branch is cached and returned by the next call
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  std::uint64_t below(std::uint64_t n);
  double gaussian();

  template <class T>
  void fill_gaussian(std::span<T> out) {
    for (auto& v : out) v = static_cast<T>(gaussian());
  }

  /// Independent generator for a named sub-stream (e.g. "shuffle", "init").
  Rng derive(std::string_view stream) const;
  Rng derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// n standard-normal draws as a rank-1 tensor.
Tensor rng_next_gaussian(Rng& rng, std::size_t n);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace vaeprobe

#endif  // VAEPROBE_RNG_HPP
