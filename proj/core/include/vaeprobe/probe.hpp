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

#ifndef VAEPROBE_PROBE_HPP
#define VAEPROBE_PROBE_HPP

#include <optional>
#include <span>
#include <vector>

#include "vaeprobe/datasets.hpp"
#include "vaeprobe/models.hpp"

namespace vaeprobe {

/// Per-example Gaussian codes N(mean, std^2). Without `std` the source is
/// deterministic and sampling returns the mean.
struct GaussianEncoding {
  Tensor mean;                // [n, L]
  std::optional<Tensor> std;  // [n, L], strictly positive

  static GaussianEncoding deterministic(Tensor features);
  static GaussianEncoding gaussian(Tensor mean, Tensor std);

  bool stochastic() const { return std.has_value(); }
  std::size_t rows() const { return mean.rows(); }
  std::size_t dim() const { return mean.cols(); }
  Tensor sample(std::span<const std::size_t> indices, Rng& rng) const;
};

/// Posterior codes of a trained VAE encoder: mean and exp(log_std).
GaussianEncoding vae_encoding(const TensorMap<float>& params, const EncoderSpec& spec,
                              const DatasetSplit& split);

struct ProbeConfig {
  std::size_t epochs = 100;
  double lr = 1e-4;
  std::size_t decay_every = 25;
  double decay_factor = 0.1;
  std::size_t batch = 32;
  std::size_t eval_samples = 16;
  std::uint64_t seed = 0;
  /// Evaluate C on the training split after every epoch.
  bool track_train = true;
};

/// Staircase: lr * decay_factor^floor(epoch / decay_every), rounded to 15
/// significant digits. `epoch` is 0-based.
double probe_learning_rate(const ProbeConfig& config, std::size_t epoch);

struct ProbeEpoch {
  std::size_t epoch = 0;  // 0 = before training
  double lr = 0.0;        // rate used during this epoch (0 for epoch 0)
  std::optional<double> train_c;
  double test_c = 0.0;
  double test_accuracy = 0.0;
};

struct ProbeResult {
  double label_distortion_nats = 0.0;
  double accuracy = 0.0;
  std::size_t samples = 1;  // S used at evaluation
  std::vector<ProbeEpoch> history;
  ParamSet params;
};

struct LabelDistortion {
  double c_nats = 0.0;
  double accuracy = 0.0;
};

/// C = mean over examples of -(1/S) sum_s log c(y | z_s); accuracy is the
/// fraction of (example, sample) pairs whose argmax class is y. S is forced
/// to 1 for deterministic sources.
LabelDistortion evaluate_classifier(const TensorMap<float>& params, const ClassifierSpec& spec,
                                    const GaussianEncoding& source, std::span<const int> labels,
                                    std::size_t samples, Rng& rng);

/// Trains `spec` on codes drawn afresh every epoch (one per example) with
/// the staircase schedule and reports test C and accuracy.
ProbeResult train_classifier(const ClassifierSpec& spec, const GaussianEncoding& train,
                             std::span<const int> train_labels, const GaussianEncoding& test,
                             std::span<const int> test_labels, const ProbeConfig& config);

/// The 2 x 200 ELU probe on `classes` classes.
ClassifierSpec probe_spec(std::size_t input_dim, int classes);

ProbeResult probe_label_distortion(const GaussianEncoding& train, std::span<const int> train_labels,
                                   const GaussianEncoding& test, std::span<const int> test_labels,
                                   int classes, const ProbeConfig& config);

}  // namespace vaeprobe

#endif  // VAEPROBE_PROBE_HPP
