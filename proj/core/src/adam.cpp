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

#include "vaeprobe/adam.hpp"

#include <cmath>

namespace vaeprobe {

template <class T>
void adam_step(AdamState<T>& state, TensorMap<T>& params, const TensorMap<T>& grads, double lr) {
  if (!(lr > 0.0)) throw Error("adam_step: learning rate must be positive");
  if (state.first_moment.empty()) {
    for (const auto& [name, value] : params) {
      state.first_moment.insert(name, BasicTensor<T>(value.shape()));
      state.second_moment.insert(name, BasicTensor<T>(value.shape()));
    }
  }
  for (const auto& [name, value] : params) {
    if (grads.at(name).shape() != value.shape()) {
      throw ShapeError("adam_step: gradient for '" + name + "' has shape " +
                       shape_string(grads.at(name).shape()) + ", parameter has " +
                       shape_string(value.shape()));
    }
  }

  ++state.step;
  const auto& cfg = state.config;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T step_size = static_cast<T>(lr / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  const T eps = static_cast<T>(cfg.epsilon);

  for (auto& [name, w] : params) {
    const auto& g = grads.at(name);
    auto& m = state.first_moment.at(name);
    auto& v = state.second_moment.at(name);
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
}

template void adam_step<float>(AdamState<float>&, TensorMap<float>&, const TensorMap<float>&,
                               double);
template void adam_step<double>(AdamState<double>&, TensorMap<double>&, const TensorMap<double>&,
                                double);

}  // namespace vaeprobe
