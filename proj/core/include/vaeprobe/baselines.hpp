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

#ifndef VAEPROBE_BASELINES_HPP
#define VAEPROBE_BASELINES_HPP

#include <utility>
#include <vector>

#include "vaeprobe/datasets.hpp"
#include "vaeprobe/objectives.hpp"
#include "vaeprobe/pca.hpp"
#include "vaeprobe/probe.hpp"

namespace vaeprobe {

enum class RandomEncoderKind { fully_connected, convolutional };

/// Fully connected: the probe trunk (2 x 200 ELU). Convolutional: the conv
/// trunk followed by the same two dense layers, no dropout.
ClassifierSpec random_encoder_spec(RandomEncoderKind kind, std::size_t input_dim,
                                   const ConvTrunkSpec& conv = {});
/// Penultimate activations of an untrained network initialized from `seed`.
Tensor random_encoder(RandomEncoderKind kind, std::uint64_t seed, const DatasetSplit& images,
                      const ConvTrunkSpec& conv = {});

enum class SupervisedKind { simple_fc, conv };

struct SupervisedResult {
  ClassifierSpec spec;
  ParamSet params;
  double label_distortion_nats = 0.0;
  double accuracy = 0.0;
  std::vector<ProbeEpoch> history;
};

/// End-to-end training on raw pixels with the probe's optimizer schedule.
SupervisedResult train_supervised_baseline(SupervisedKind kind, const DatasetSplit& train,
                                           const DatasetSplit& test, const ProbeConfig& config,
                                           const ConvTrunkSpec& conv = {});

/// C(R) for a coder that keeps a uniformly random fraction R / H_X of an
/// optimal lossless code: linear from (0, H_Y) to (H_X, floor), flat after.
struct DiscardLine {
  double h_x = kMnistEntropyNats;
  double h_y = std::log(10.0);
  double floor = 0.0;

  DiscardLine() = default;
  DiscardLine(const EntropyConstants& constants, double floor = 0.0);

  double operator()(double rate_nats) const;
  /// `points` evenly spaced rates from 0 to H_X inclusive.
  std::vector<std::pair<double, double>> sample(std::size_t points) const;
};

double discard_line(double rate_nats, const EntropyConstants& constants, double floor = 0.0);

}  // namespace vaeprobe

#endif  // VAEPROBE_BASELINES_HPP
