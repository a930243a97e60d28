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

#ifndef VAEPROBE_MODELS_HPP
#define VAEPROBE_MODELS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vaeprobe/graph.hpp"
#include "vaeprobe/rng.hpp"
#include "vaeprobe/tensor_map.hpp"

namespace vaeprobe {

inline constexpr float kLogStdMin = -7.0f;
inline constexpr float kLogStdMax = 7.0f;

/// Stack of same-padded 5x5 convolutions with ELU, 2x2 max pooling (and
/// train-time dropout) after the listed 1-based layer indices.
struct ConvTrunkSpec {
  std::size_t layers = 5;
  std::size_t depth = 64;
  std::size_t kernel = 5;
  std::vector<std::size_t> pool_after{3, 5};
  double dropout = 0.3;
  std::size_t channels = 1;
  std::size_t height = 28;
  std::size_t width = 28;

  std::size_t output_dim() const;
  std::string describe() const;
};

struct EncoderSpec {
  enum class Kind { mlp, conv };
  Kind kind = Kind::mlp;
  std::size_t input_dim = 784;
  std::vector<std::size_t> hidden{512, 512};
  ConvTrunkSpec conv;  // used when kind == conv
  std::size_t latent_dim = 16;

  std::string describe() const;
};

/// Factorized Bernoulli decoder: MLP from z to one logit per pixel.
struct DecoderSpec {
  std::vector<std::size_t> hidden{512, 512};
  std::size_t latent_dim = 16;
  std::size_t output_dim = 784;

  std::string describe() const;
};

struct MarginalSpec {
  enum class Kind { fixed_standard_gaussian, learned_mixture };
  Kind kind = Kind::fixed_standard_gaussian;
  std::size_t components = 64;
  std::size_t latent_dim = 16;

  std::string describe() const;
};

/// 2 x 200 ELU probe by default; an optional conv trunk turns it into the
/// supervised convolutional baseline.
struct ClassifierSpec {
  std::size_t input_dim = 16;
  std::vector<std::size_t> hidden{200, 200};
  int classes = 10;
  std::optional<ConvTrunkSpec> conv;

  std::string describe() const;
};

struct VaeSpec {
  EncoderSpec encoder;
  DecoderSpec decoder;
  MarginalSpec marginal;

  /// Sets every component's latent_dim.
  void set_latent_dim(std::size_t latent);
  std::string describe() const;
};

struct ParamSet {
  TensorMap<float> tensors;
  std::string spec_hash;
  std::uint64_t init_seed = 0;
};

std::string spec_hash(const std::string& description);

/// Glorot-uniform weights, zero biases; the classifier output layer is all
/// zero. Mixture means are N(0,1) draws, log-stds and logits zero.
ParamSet init_params(const VaeSpec& spec, std::uint64_t seed);
ParamSet init_params(const ClassifierSpec& spec, std::uint64_t seed);
TensorMap<float> init_encoder(const EncoderSpec& spec, Rng& rng);
TensorMap<float> init_decoder(const DecoderSpec& spec, Rng& rng);
TensorMap<float> init_marginal(const MarginalSpec& spec, Rng& rng);
TensorMap<float> init_classifier(const ClassifierSpec& spec, Rng& rng);

template <class T>
struct PosteriorVars {
  Var mean;
  Var log_std;  // clamped to [kLogStdMin, kLogStdMax]
};

/// Graph builders. `params` must contain the component's tensors; names
/// are prefixed "encoder.", "decoder.", "marginal.", "classifier.".
template <class T>
PosteriorVars<T> encode(Graph<T>& g, const TensorMap<T>& params, const EncoderSpec& spec, Var x);
template <class T>
Var decode(Graph<T>& g, const TensorMap<T>& params, const DecoderSpec& spec, Var z);
/// log m(z) per row, in nats.
template <class T>
Var marginal_log_density(Graph<T>& g, const TensorMap<T>& params, const MarginalSpec& spec, Var z);
/// Class logits. `dropout_rng` enables train-time dropout in a conv trunk;
/// pass nullptr for evaluation.
template <class T>
Var classify(Graph<T>& g, const TensorMap<T>& params, const ClassifierSpec& spec, Var input,
             Rng* dropout_rng = nullptr);
/// Activations of the last hidden layer (the classifier's input to its head).
template <class T>
Var classifier_features(Graph<T>& g, const TensorMap<T>& params, const ClassifierSpec& spec,
                        Var input, Rng* dropout_rng = nullptr);

/// Per-example diagonal Gaussian posterior for a batch.
struct DiagGaussian {
  Tensor mean;     // [n, L]
  Tensor log_std;  // [n, L]
};

DiagGaussian encode(const TensorMap<float>& params, const EncoderSpec& spec, const Tensor& x);
Tensor decode(const TensorMap<float>& params, const DecoderSpec& spec, const Tensor& z);
Tensor marginal_log_density(const TensorMap<float>& params, const MarginalSpec& spec,
                            const Tensor& z);
Tensor classify(const TensorMap<float>& params, const ClassifierSpec& spec, const Tensor& input);

}  // namespace vaeprobe

#endif  // VAEPROBE_MODELS_HPP
