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

#ifndef VAEPROBE_TRAINING_HPP
#define VAEPROBE_TRAINING_HPP

#include <functional>
#include <string>
#include <vector>

#include "vaeprobe/datasets.hpp"
#include "vaeprobe/models.hpp"
#include "vaeprobe/objectives.hpp"

namespace vaeprobe {

struct TrainConfig {
  double beta = 1.0;
  std::size_t epochs = 20;
  double lr = 1e-3;
  std::size_t batch = 128;
  std::uint64_t seed = 0;
  /// Monte-Carlo samples for the evaluation rate under a mixture marginal.
  std::size_t eval_samples = 16;
};

enum class RunStatus { completed, aborted_nan, failed };
std::string to_string(RunStatus status);

struct TrainResult {
  ParamSet params;
  std::vector<RunMetrics> history;  // epoch 0 (initialization) first
  RunStatus status = RunStatus::completed;
  std::string diagnostic;
};

struct VaeEvaluation {
  double rate_nats = 0.0;
  double distortion_nats = 0.0;
};

/// Held-out rate and distortion. The rate is closed form for the fixed
/// marginal and a `samples`-draw estimate for a mixture; the distortion
/// uses one posterior sample per example.
VaeEvaluation evaluate_vae(const TensorMap<float>& params, const VaeSpec& spec,
                           const DatasetSplit& split, std::size_t samples, Rng& rng);

using EpochCallback = std::function<void(const RunMetrics&)>;

/// Adam on the beta-VAE loss. Deterministic in (spec, config, data). A
/// non-finite value stops training with status aborted_nan; the history
/// then ends at the last finite evaluation.
TrainResult train_vae(const VaeSpec& spec, const TrainConfig& config, const DatasetSplit& train,
                      const DatasetSplit& eval, const EntropyConstants& constants = {},
                      const EpochCallback& on_epoch = {});

}  // namespace vaeprobe

#endif  // VAEPROBE_TRAINING_HPP
