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

#include "vaeprobe/objectives.hpp"

#include <algorithm>

#include "vaeprobe/errors.hpp"

namespace vaeprobe {

double compression_factor(double rate_nats, double h_x) {
  if (!(rate_nats > 0.0)) throw Error("compression_factor: rate must be positive");
  return h_x / rate_nats;
}

double rate_closed_form(const DiagGaussian& posterior) {
  const auto& mu = posterior.mean;
  const auto& s = posterior.log_std;
  if (mu.shape() != s.shape() || mu.rank() != 2) {
    throw ShapeError("rate_closed_form: mean " + shape_string(mu.shape()) + " vs log_std " +
                     shape_string(s.shape()));
  }
  if (!mu.all_finite() || !s.all_finite()) throw NumericError("rate_closed_form: non-finite posterior");
  const std::size_t n = mu.rows(), l = mu.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double kl = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double m = mu.at(i, j), ls = s.at(i, j);
      kl += -ls + 0.5 * (std::exp(2.0 * ls) + m * m - 1.0);
    }
    total += kl;
  }
  return total / static_cast<double>(n);
}

template <class T>
Var rate_closed_form(Graph<T>& g, Var mean, Var log_std) {
  Var variance = g.exp(g.scale(log_std, T(2)));
  Var inner = g.add_scalar(g.add(variance, g.mul(mean, mean)), T(-1));
  return g.sum_rows(g.sub(g.scale(inner, T(0.5)), log_std));
}

McEstimate rate_monte_carlo(const DiagGaussian& posterior, const TensorMap<float>& marginal_params,
                            const MarginalSpec& marginal, std::size_t samples, Rng& rng) {
  if (samples == 0) throw Error("rate_monte_carlo: samples must be >= 1");
  const auto& mu = posterior.mean;
  const auto& ls = posterior.log_std;
  if (mu.shape() != ls.shape() || mu.rank() != 2 || mu.cols() != marginal.latent_dim) {
    throw ShapeError("rate_monte_carlo: posterior " + shape_string(mu.shape()) +
                     " does not match latent dim " + std::to_string(marginal.latent_dim));
  }
  const auto params = marginal_params.cast<double>();
  const std::size_t n = mu.rows(), l = mu.cols();
  constexpr std::size_t kChunk = 4096;

  double total = 0.0, variance_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t start = 0; start < samples; start += kChunk) {
      const std::size_t s = std::min(kChunk, samples - start);
      TensorD m(Shape{s, l}), sd(Shape{s, l}), eps(Shape{s, l});
      for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t j = 0; j < l; ++j) {
          m.at(r, j) = mu.at(i, j);
          sd.at(r, j) = ls.at(i, j);
        }
      }
      rng.fill_gaussian(eps.span());
      Graph<double> g;
      Var mv = g.constant(m), sv = g.constant(sd);
      Var z = g.reparam_sample(mv, sv, eps);
      Var log_q = g.gaussian_log_density(z, mv, sv);
      Var log_m = marginal_log_density(g, params, marginal, z);
      const auto& q = g.value(log_q);
      const auto& p = g.value(log_m);
      for (std::size_t r = 0; r < s; ++r) {
        const double v = q[r] - p[r];
        sum += v;
        sum_sq += v * v;
      }
    }
    const double count = static_cast<double>(samples);
    const double mean_i = sum / count;
    total += mean_i;
    if (samples > 1) {
      const double var_i = std::max(0.0, (sum_sq - count * mean_i * mean_i) / (count - 1.0));
      variance_sum += var_i / count;
    }
  }
  const double dn = static_cast<double>(n);
  return {total / dn, std::sqrt(variance_sum) / dn};
}

template <class T>
Var distortion(Graph<T>& g, Var logits, const BasicTensor<T>& x) {
  return g.sum_rows(g.bernoulli_ce_from_logits(logits, x));
}

double distortion(const TensorMap<float>& decoder_params, const DecoderSpec& spec, const Tensor& x,
                  const Tensor& z) {
  Graph<float> g;
  Var logits = decode(g, decoder_params, spec, g.constant(z));
  return static_cast<double>(g.value(g.mean(distortion(g, logits, x))).item());
}

template <class T>
LossTerms<T> beta_vae_loss(Graph<T>& g, const TensorMap<T>& params, const VaeSpec& spec,
                           const BasicTensor<T>& x, double beta, Rng& rng) {
  if (!(beta >= 0.0)) throw Error("beta_vae_loss: beta must be >= 0");
  Var input = g.constant(x);
  auto post = encode(g, params, spec.encoder, input);
  BasicTensor<T> eps(g.value(post.mean).shape());
  rng.fill_gaussian(eps.span());
  Var z = g.reparam_sample(post.mean, post.log_std, eps);
  Var d = g.mean(distortion(g, decode(g, params, spec.decoder, z), x));

  Var per_example_rate;
  if (spec.marginal.kind == MarginalSpec::Kind::fixed_standard_gaussian) {
    per_example_rate = rate_closed_form(g, post.mean, post.log_std);
  } else {
    per_example_rate = g.sub(g.gaussian_log_density(z, post.mean, post.log_std),
                             marginal_log_density(g, params, spec.marginal, z));
  }
  Var r = g.mean(per_example_rate);
  Var loss = g.add(d, g.scale(r, static_cast<T>(beta)));
  return {loss, r, d};
}

template Var rate_closed_form<float>(Graph<float>&, Var, Var);
template Var rate_closed_form<double>(Graph<double>&, Var, Var);
template Var distortion<float>(Graph<float>&, Var, const Tensor&);
template Var distortion<double>(Graph<double>&, Var, const TensorD&);
template LossTerms<float> beta_vae_loss<float>(Graph<float>&, const TensorMap<float>&,
                                               const VaeSpec&, const Tensor&, double, Rng&);
template LossTerms<double> beta_vae_loss<double>(Graph<double>&, const TensorMap<double>&,
                                                 const VaeSpec&, const TensorD&, double, Rng&);

}  // namespace vaeprobe
