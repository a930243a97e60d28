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

#ifndef VAEPROBE_ADAM_HPP
#define VAEPROBE_ADAM_HPP

#include <cstdint>

#include "vaeprobe/tensor_map.hpp"

namespace vaeprobe {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class T>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  TensorMap<T> first_moment;
  TensorMap<T> second_moment;
};

/// Bias-corrected Adam update of every tensor in `params`:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   w <- w - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Moments are created lazily (zero) on the first step.
template <class T>
void adam_step(AdamState<T>& state, TensorMap<T>& params, const TensorMap<T>& grads, double lr);

extern template void adam_step<float>(AdamState<float>&, TensorMap<float>&,
                                      const TensorMap<float>&, double);
extern template void adam_step<double>(AdamState<double>&, TensorMap<double>&,
                                       const TensorMap<double>&, double);

}  // namespace vaeprobe

#endif  // VAEPROBE_ADAM_HPP
