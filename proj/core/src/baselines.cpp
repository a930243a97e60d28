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

#include "vaeprobe/baselines.hpp"

#include <algorithm>

namespace vaeprobe {

ClassifierSpec random_encoder_spec(RandomEncoderKind kind, std::size_t input_dim,
                                   const ConvTrunkSpec& conv) {
  ClassifierSpec spec = probe_spec(input_dim, 10);
  if (kind == RandomEncoderKind::convolutional) {
    spec.conv = conv;
    spec.conv->dropout = 0.0;
  }
  return spec;
}

Tensor random_encoder(RandomEncoderKind kind, std::uint64_t seed, const DatasetSplit& images,
                      const ConvTrunkSpec& conv) {
  if (images.rows == 0) throw DataError("random_encoder: empty split");
  const ClassifierSpec spec = random_encoder_spec(kind, images.cols, conv);
  const ParamSet ps = init_params(spec, seed);
  const std::size_t width = spec.hidden.back();
  Tensor out(Shape{images.rows, width});
  for (const auto& idx : sequential_batches(images.rows, 256)) {
    Graph<float> g;
    const auto& h = g.value(classifier_features(g, ps.tensors, spec, g.constant(images.gather(idx))));
    std::copy(h.span().begin(), h.span().end(), out.ptr() + idx.front() * width);
  }
  return out;
}

SupervisedResult train_supervised_baseline(SupervisedKind kind, const DatasetSplit& train,
                                           const DatasetSplit& test, const ProbeConfig& config,
                                           const ConvTrunkSpec& conv) {
  if (!train.labels || !test.labels) throw DataError("supervised baseline needs labeled splits");
  SupervisedResult out;
  out.spec = probe_spec(train.cols, train.class_count);
  if (kind == SupervisedKind::conv) out.spec.conv = conv;
  auto as_source = [](const DatasetSplit& s) {
    return GaussianEncoding::deterministic(Tensor(Shape{s.rows, s.cols}, s.images));
  };
  auto r = train_classifier(out.spec, as_source(train), *train.labels, as_source(test),
                            *test.labels, config);
  out.params = std::move(r.params);
  out.label_distortion_nats = r.label_distortion_nats;
  out.accuracy = r.accuracy;
  out.history = std::move(r.history);
  return out;
}

DiscardLine::DiscardLine(const EntropyConstants& constants, double floor_nats)
    : h_x(constants.h_x), h_y(constants.h_y), floor(floor_nats) {
  if (!(h_x > 0.0) || !(h_y > 0.0)) throw ConfigError("discard line: entropies must be positive");
  if (!(floor >= 0.0) || floor > h_y) {
    throw ConfigError("baselines.discard_floor must be in [0, H_Y]");
  }
}

double DiscardLine::operator()(double rate_nats) const {
  if (!(rate_nats >= 0.0)) throw ConfigError("discard line: rate must be >= 0");
  const double kept = std::min(rate_nats, h_x) / h_x;
  return h_y * (1.0 - kept) + kept * floor;
}

std::vector<std::pair<double, double>> DiscardLine::sample(std::size_t points) const {
  if (points < 2) throw ConfigError("discard line: need at least 2 points");
  std::vector<std::pair<double, double>> out;
  out.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double r = h_x * (static_cast<double>(i) / static_cast<double>(points - 1));
    out.emplace_back(r, (*this)(r));
  }
  return out;
}

double discard_line(double rate_nats, const EntropyConstants& constants, double floor) {
  return DiscardLine(constants, floor)(rate_nats);
}

}  // namespace vaeprobe
