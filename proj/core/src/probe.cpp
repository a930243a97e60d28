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

#include "vaeprobe/probe.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "vaeprobe/adam.hpp"
#include "vaeprobe/errors.hpp"

namespace vaeprobe {

namespace {

constexpr std::size_t kEvalBatch = 500;

void check_labels(std::span<const int> labels, std::size_t rows, int classes, const char* what) {
  if (labels.size() != rows) {
    throw DataError(std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(rows) + " examples");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw DataError(std::string(what) + ": label " + std::to_string(y) + " outside [0, " +
                      std::to_string(classes) + ")");
    }
  }
}

}  // namespace

GaussianEncoding GaussianEncoding::deterministic(Tensor features) {
  if (features.rank() != 2) throw ShapeError("encoding features must be [n, L]");
  return {std::move(features), std::nullopt};
}

GaussianEncoding GaussianEncoding::gaussian(Tensor mean, Tensor std) {
  if (mean.rank() != 2 || mean.shape() != std.shape()) {
    throw ShapeError("encoding mean " + shape_string(mean.shape()) + " vs std " +
                     shape_string(std.shape()));
  }
  for (float s : std.span()) {
    if (!(s > 0.0f) || !std::isfinite(s)) throw NumericError("encoding std must be positive and finite");
  }
  return {std::move(mean), std::move(std)};
}

Tensor GaussianEncoding::sample(std::span<const std::size_t> indices, Rng& rng) const {
  const std::size_t l = dim();
  Tensor out(Shape{indices.size(), l});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= rows()) throw ShapeError("encoding row " + std::to_string(i) + " out of range");
    for (std::size_t j = 0; j < l; ++j) {
      float v = mean.at(i, j);
      if (std) v += std->at(i, j) * static_cast<float>(rng.gaussian());
      out.at(r, j) = v;
    }
  }
  return out;
}

GaussianEncoding vae_encoding(const TensorMap<float>& params, const EncoderSpec& spec,
                              const DatasetSplit& split) {
  if (split.rows == 0) throw DataError("vae_encoding: empty split");
  const std::size_t l = spec.latent_dim;
  Tensor mean(Shape{split.rows, l}), sd(Shape{split.rows, l});
  for (const auto& idx : sequential_batches(split.rows, kEvalBatch)) {
    const auto post = encode(params, spec, split.gather(idx));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t j = 0; j < l; ++j) {
        mean.at(idx[r], j) = post.mean.at(r, j);
        sd.at(idx[r], j) = std::exp(post.log_std.at(r, j));
      }
    }
  }
  return GaussianEncoding::gaussian(std::move(mean), std::move(sd));
}

double probe_learning_rate(const ProbeConfig& config, std::size_t epoch) {
  const std::size_t steps = config.decay_every == 0 ? 0 : epoch / config.decay_every;
  const double raw = config.lr * std::pow(config.decay_factor, static_cast<double>(steps));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", raw);
  return std::strtod(buf, nullptr);
}

LabelDistortion evaluate_classifier(const TensorMap<float>& params, const ClassifierSpec& spec,
                                    const GaussianEncoding& source, std::span<const int> labels,
                                    std::size_t samples, Rng& rng) {
  check_labels(labels, source.rows(), spec.classes, "evaluate_classifier");
  if (samples == 0) throw ConfigError("probe samples must be >= 1");
  const std::size_t s_count = source.stochastic() ? samples : 1;
  const auto k = static_cast<std::size_t>(spec.classes);
  double c = 0.0, correct = 0.0;
  for (const auto& idx : sequential_batches(source.rows(), kEvalBatch)) {
    for (std::size_t s = 0; s < s_count; ++s) {
      const Tensor logits = classify(params, spec, source.sample(idx, rng));
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const float* row = logits.ptr() + r * k;
        std::size_t best = 0;
        double mx = row[0];
        for (std::size_t j = 1; j < k; ++j) {
          if (row[j] > row[best]) best = j;
          mx = std::max(mx, static_cast<double>(row[j]));
        }
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
        const auto y = static_cast<std::size_t>(labels[idx[r]]);
        c += mx + std::log(z) - static_cast<double>(row[y]);
        if (best == y) correct += 1.0;
      }
    }
  }
  const double total = static_cast<double>(source.rows() * s_count);
  return {c / total, correct / total};
}

ProbeResult train_classifier(const ClassifierSpec& spec, const GaussianEncoding& train,
                             std::span<const int> train_labels, const GaussianEncoding& test,
                             std::span<const int> test_labels, const ProbeConfig& config) {
  check_labels(train_labels, train.rows(), spec.classes, "probe train split");
  check_labels(test_labels, test.rows(), spec.classes, "probe test split");
  if (train.dim() != spec.input_dim || test.dim() != spec.input_dim) {
    throw ShapeError("probe input dim " + std::to_string(train.dim()) + " vs classifier " +
                     std::to_string(spec.input_dim));
  }
  if (config.batch == 0) throw ConfigError("probe.batch must be >= 1");
  if (!(config.lr > 0.0)) throw ConfigError("probe.lr must be > 0");

  ProbeResult result;
  result.params = init_params(spec, config.seed);
  result.samples = test.stochastic() ? config.eval_samples : 1;
  auto& params = result.params.tensors;
  const Rng root(config.seed);
  Rng sample_rng = root.derive("samples");
  Rng dropout_rng = root.derive("dropout");
  const Rng eval_root = root.derive("eval");
  const std::uint64_t shuffle_seed = root.derive("shuffle").next_u64();
  AdamState<float> adam;

  auto record = [&](std::size_t epoch, double lr) {
    ProbeEpoch row;
    row.epoch = epoch;
    row.lr = lr;
    Rng test_rng = eval_root.derive(2 * epoch);
    const auto t = evaluate_classifier(params, spec, test, test_labels, config.eval_samples, test_rng);
    row.test_c = t.c_nats;
    row.test_accuracy = t.accuracy;
    if (config.track_train) {
      Rng train_rng = eval_root.derive(2 * epoch + 1);
      row.train_c = evaluate_classifier(params, spec, train, train_labels, config.eval_samples, train_rng).c_nats;
    }
    result.history.push_back(row);
  };

  record(0, 0.0);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    const double lr = probe_learning_rate(config, e);
    for (const auto& idx : iterate_batches(train.rows(), config.batch, shuffle_seed, e)) {
      std::vector<int> y(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r) y[r] = train_labels[idx[r]];
      Graph<float> g;
      Var logits = classify(g, params, spec, g.constant(train.sample(idx, sample_rng)),
                            spec.conv ? &dropout_rng : nullptr);
      Var loss = g.mean(g.softmax_ce_from_logits(logits, y));
      adam_step(adam, params, g.backward(loss), lr);
    }
    record(e + 1, lr);
  }
  result.label_distortion_nats = result.history.back().test_c;
  result.accuracy = result.history.back().test_accuracy;
  return result;
}

ClassifierSpec probe_spec(std::size_t input_dim, int classes) {
  ClassifierSpec spec;
  spec.input_dim = input_dim;
  spec.classes = classes;
  return spec;
}

ProbeResult probe_label_distortion(const GaussianEncoding& train, std::span<const int> train_labels,
                                   const GaussianEncoding& test, std::span<const int> test_labels,
                                   int classes, const ProbeConfig& config) {
  return train_classifier(probe_spec(train.dim(), classes), train, train_labels, test, test_labels,
                          config);
}

}  // namespace vaeprobe
