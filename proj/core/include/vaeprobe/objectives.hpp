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

#ifndef VAEPROBE_OBJECTIVES_HPP
#define VAEPROBE_OBJECTIVES_HPP

#include <cmath>
#include <optional>
#include <string>

#include "vaeprobe/graph.hpp"
#include "vaeprobe/models.hpp"

namespace vaeprobe {

/// Entropy estimate for binarized MNIST, in nats.
inline constexpr double kMnistEntropyNats = 79.78;

/// Dataset entropy H(X) and label entropy H(Y) = ln K, in nats.
struct EntropyConstants {
  double h_x = kMnistEntropyNats;
  double h_y = std::log(10.0);

  static EntropyConstants mnist() { return {kMnistEntropyNats, std::log(10.0)}; }
  /// Omniglot has no published H(X) here; the caller supplies one.
  static EntropyConstants omniglot_alphabets(double h_x) { return {h_x, std::log(50.0)}; }
  static EntropyConstants omniglot_characters(double h_x) { return {h_x, std::log(1623.0)}; }
};

/// One measured point. Every quantity is in nats.
struct RunMetrics {
  std::string run_id;
  double beta = 0.0;
  std::size_t epoch = 0;
  double rate_nats = 0.0;
  double distortion_nats = 0.0;
  double loss = 0.0;  // distortion + beta * rate
  std::optional<double> label_distortion_nats;
  std::optional<double> accuracy;
  std::optional<double> compression_factor;  // only when rate > 0
};

/// H_X / rate; rate must be positive.
double compression_factor(double rate_nats, double h_x);
inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

/// KL(N(mean, exp(log_std)^2) || N(0, I)) per example, batch-averaged:
///   sum_i [ -log s_i + (s_i^2 + mu_i^2 - 1) / 2 ]
double rate_closed_form(const DiagGaussian& posterior);

/// Graph version; returns the per-example KL, shape [n].
template <class T>
Var rate_closed_form(Graph<T>& g, Var mean, Var log_std);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Average over `samples` reparameterized draws per example of
/// log q(z|x) - log m(z), batch-averaged. Evaluated in double precision.
McEstimate rate_monte_carlo(const DiagGaussian& posterior, const TensorMap<float>& marginal_params,
                            const MarginalSpec& marginal, std::size_t samples, Rng& rng);

/// Per-example Bernoulli negative log-likelihood of binary x under
/// decoder logits, shape [n].
template <class T>
Var distortion(Graph<T>& g, Var logits, const BasicTensor<T>& x);

/// Batch-mean distortion of x given z, in nats per example.
double distortion(const TensorMap<float>& decoder_params, const DecoderSpec& spec, const Tensor& x,
                  const Tensor& z);

template <class T>
struct LossTerms {
  Var loss;        // distortion + beta * rate (scalar)
  Var rate;        // batch mean (scalar)
  Var distortion;  // batch mean (scalar)
};

/// One reparameterized sample per example. The rate is closed form for
/// the fixed Gaussian marginal and a single-sample estimate
/// log q(z|x) - log m(z) for a learned mixture.
template <class T>
LossTerms<T> beta_vae_loss(Graph<T>& g, const TensorMap<T>& params, const VaeSpec& spec,
                           const BasicTensor<T>& x, double beta, Rng& rng);

}  // namespace vaeprobe

#endif  // VAEPROBE_OBJECTIVES_HPP
