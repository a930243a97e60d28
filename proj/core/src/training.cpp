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

#include "vaeprobe/training.hpp"

#include <cmath>

#include "vaeprobe/adam.hpp"
#include "vaeprobe/errors.hpp"

namespace vaeprobe {

namespace {

constexpr std::size_t kEvalBatch = 500;

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::aborted_nan: return "aborted-nan";
    case RunStatus::failed: return "failed";
  }
  return "failed";
}

VaeEvaluation evaluate_vae(const TensorMap<float>& params, const VaeSpec& spec,
                           const DatasetSplit& split, std::size_t samples, Rng& rng) {
  if (split.rows == 0) throw DataError("evaluate_vae: empty split");
  if (samples == 0) throw ConfigError("evaluate_vae: samples must be >= 1");
  const bool fixed = spec.marginal.kind == MarginalSpec::Kind::fixed_standard_gaussian;
  double rate = 0.0, dist = 0.0;
  for (const auto& idx : sequential_batches(split.rows, kEvalBatch)) {
    const Tensor x = split.gather(idx);
    Graph<float> g;
    auto post = encode(g, params, spec.encoder, g.constant(x));
    Tensor eps(g.value(post.mean).shape());
    if (fixed) {
      const auto& r = g.value(rate_closed_form(g, post.mean, post.log_std));
      for (float v : r.span()) rate += v;
    } else {
      for (std::size_t s = 0; s < samples; ++s) {
        rng.fill_gaussian(eps.span());
        Var z = g.reparam_sample(post.mean, post.log_std, eps);
        const auto& r = g.value(g.sub(g.gaussian_log_density(z, post.mean, post.log_std),
                                      marginal_log_density(g, params, spec.marginal, z)));
        for (float v : r.span()) rate += static_cast<double>(v) / static_cast<double>(samples);
      }
    }
    rng.fill_gaussian(eps.span());
    Var z = g.reparam_sample(post.mean, post.log_std, eps);
    const auto& d = g.value(distortion(g, decode(g, params, spec.decoder, z), x));
    for (float v : d.span()) dist += v;
  }
  const double n = static_cast<double>(split.rows);
  VaeEvaluation out{rate / n, dist / n};
  if (!std::isfinite(out.rate_nats) || !std::isfinite(out.distortion_nats)) {
    throw NumericError("evaluate_vae: non-finite metrics");
  }
  return out;
}

TrainResult train_vae(const VaeSpec& spec, const TrainConfig& config, const DatasetSplit& train,
                      const DatasetSplit& eval, const EntropyConstants& constants,
                      const EpochCallback& on_epoch) {
  if (!(config.beta >= 0.0)) throw ConfigError("train.beta must be >= 0");
  if (!(config.lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (config.batch == 0) throw ConfigError("train.batch must be >= 1");
  if (train.rows == 0) throw DataError("train_vae: empty training split");
  if (train.cols != spec.encoder.input_dim || eval.cols != spec.encoder.input_dim) {
    throw ShapeError("train_vae: data has " + std::to_string(train.cols) +
                     " columns, encoder expects " + std::to_string(spec.encoder.input_dim));
  }

  TrainResult result;
  result.params = init_params(spec, config.seed);
  auto& params = result.params.tensors;
  const Rng root(config.seed);
  Rng noise = root.derive("noise");
  Rng eval_rng = root.derive("eval");
  const std::uint64_t shuffle_seed = root.derive("shuffle").next_u64();
  AdamState<float> adam;

  auto evaluate_row = [&](std::size_t epoch) {
    const auto ev = evaluate_vae(params, spec, eval, config.eval_samples, eval_rng);
    RunMetrics m;
    m.beta = config.beta;
    m.epoch = epoch;
    m.rate_nats = ev.rate_nats;
    m.distortion_nats = ev.distortion_nats;
    m.loss = ev.distortion_nats + config.beta * ev.rate_nats;
    if (m.rate_nats > 0.0) m.compression_factor = compression_factor(m.rate_nats, constants.h_x);
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  };

  std::size_t epoch = 0;
  try {
    evaluate_row(0);
    for (epoch = 1; epoch <= config.epochs; ++epoch) {
      for (const auto& idx : iterate_batches(train.rows, config.batch, shuffle_seed, epoch - 1)) {
        const Tensor x = train.gather(idx);
        Graph<float> g;
        auto terms = beta_vae_loss(g, params, spec, x, config.beta, noise);
        adam_step(adam, params, g.backward(terms.loss), config.lr);
      }
      evaluate_row(epoch);
    }
  } catch (const NumericError& e) {
    result.status = RunStatus::aborted_nan;
    result.diagnostic = "epoch " + std::to_string(epoch) + ": " + e.what();
  }
  return result;
}

}  // namespace vaeprobe
