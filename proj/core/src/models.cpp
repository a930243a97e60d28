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

#include "vaeprobe/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vaeprobe/errors.hpp"

namespace vaeprobe {

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "-" : "") + std::to_string(v[i]);
  return s;
}

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (auto& v : t.span()) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
  return t;
}

void add_dense(TensorMap<float>& out, const std::string& name, std::size_t in, std::size_t width,
               Rng& rng) {
  out.insert(name + ".weight", glorot(Shape{in, width}, in, width, rng));
  out.insert(name + ".bias", Tensor(Shape{width}));
}

void add_conv_trunk(TensorMap<float>& out, const std::string& prefix, const ConvTrunkSpec& spec,
                    Rng& rng) {
  std::size_t channels = spec.channels;
  for (std::size_t i = 1; i <= spec.layers; ++i) {
    const std::size_t kk = spec.kernel * spec.kernel;
    out.insert(prefix + ".conv" + std::to_string(i) + ".weight",
               glorot(Shape{spec.depth, channels, spec.kernel, spec.kernel}, channels * kk,
                      spec.depth * kk, rng));
    out.insert(prefix + ".conv" + std::to_string(i) + ".bias", Tensor(Shape{spec.depth}));
    channels = spec.depth;
  }
}

bool pools_after(const ConvTrunkSpec& spec, std::size_t layer) {
  return std::find(spec.pool_after.begin(), spec.pool_after.end(), layer) != spec.pool_after.end();
}

template <class T>
Var param_of(Graph<T>& g, const TensorMap<T>& params, const std::string& name) {
  return g.param(name, params.at(name));
}

template <class T>
Var dense(Graph<T>& g, const TensorMap<T>& params, const std::string& name, Var x) {
  return g.affine(x, param_of(g, params, name + ".weight"), param_of(g, params, name + ".bias"));
}

template <class T>
Var conv_trunk(Graph<T>& g, const TensorMap<T>& params, const std::string& prefix,
               const ConvTrunkSpec& spec, Var x, Rng* dropout_rng) {
  const std::size_t n = g.value(x).dim(0);
  Var h = g.reshape(x, Shape{n, spec.channels, spec.height, spec.width});
  for (std::size_t i = 1; i <= spec.layers; ++i) {
    const std::string name = prefix + ".conv" + std::to_string(i);
    h = g.elu(g.conv2d(h, param_of(g, params, name + ".weight"), param_of(g, params, name + ".bias")));
    if (pools_after(spec, i)) {
      h = g.maxpool2x2(h);
      if (dropout_rng && spec.dropout > 0.0) h = g.dropout(h, spec.dropout, *dropout_rng);
    }
  }
  return g.reshape(h, Shape{n, spec.output_dim()});
}

}  // namespace

std::size_t ConvTrunkSpec::output_dim() const {
  std::size_t h = height, w = width;
  for (std::size_t i = 1; i <= layers; ++i) {
    if (pools_after(*this, i)) {
      if (h % 2 || w % 2) throw ConfigError("conv trunk: pooling an odd spatial size");
      h /= 2;
      w /= 2;
    }
  }
  return depth * h * w;
}

std::string ConvTrunkSpec::describe() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "conv(layers=%zu,depth=%zu,k=%zu,pool=%s,dropout=%.4g,in=%zux%zux%zu)",
                layers, depth, kernel, join(pool_after).c_str(), dropout, channels, height, width);
  return buf;
}

std::string EncoderSpec::describe() const {
  std::string trunk = kind == Kind::mlp ? "mlp(" + join(hidden) + ")" : conv.describe();
  return "encoder{" + trunk + ",in=" + std::to_string(input_dim) +
         ",latent=" + std::to_string(latent_dim) + "}";
}

std::string DecoderSpec::describe() const {
  return "decoder{mlp(" + join(hidden) + "),latent=" + std::to_string(latent_dim) +
         ",out=" + std::to_string(output_dim) + "}";
}

std::string MarginalSpec::describe() const {
  if (kind == Kind::fixed_standard_gaussian) {
    return "marginal{fixed,latent=" + std::to_string(latent_dim) + "}";
  }
  return "marginal{mixture(" + std::to_string(components) + "),latent=" + std::to_string(latent_dim) +
         "}";
}

std::string ClassifierSpec::describe() const {
  return "classifier{" + (conv ? conv->describe() + "," : std::string()) + "mlp(" + join(hidden) +
         "),in=" + std::to_string(input_dim) + ",classes=" + std::to_string(classes) + "}";
}

void VaeSpec::set_latent_dim(std::size_t latent) {
  encoder.latent_dim = latent;
  decoder.latent_dim = latent;
  marginal.latent_dim = latent;
}

std::string VaeSpec::describe() const {
  return encoder.describe() + decoder.describe() + marginal.describe();
}

std::string spec_hash(const std::string& description) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(description)));
  return buf;
}

TensorMap<float> init_encoder(const EncoderSpec& spec, Rng& rng) {
  if (spec.latent_dim == 0) throw ConfigError("encoder latent_dim must be >= 1");
  TensorMap<float> out;
  std::size_t width = spec.input_dim;
  if (spec.kind == EncoderSpec::Kind::conv) {
    if (spec.conv.channels * spec.conv.height * spec.conv.width != spec.input_dim) {
      throw ConfigError("conv encoder input shape does not match input_dim");
    }
    add_conv_trunk(out, "encoder", spec.conv, rng);
    width = spec.conv.output_dim();
  } else {
    for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
      if (spec.hidden[i] == 0) throw ConfigError("encoder hidden sizes must be positive");
      add_dense(out, "encoder.fc" + std::to_string(i), width, spec.hidden[i], rng);
      width = spec.hidden[i];
    }
  }
  add_dense(out, "encoder.head", width, 2 * spec.latent_dim, rng);
  return out;
}

TensorMap<float> init_decoder(const DecoderSpec& spec, Rng& rng) {
  TensorMap<float> out;
  std::size_t width = spec.latent_dim;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    if (spec.hidden[i] == 0) throw ConfigError("decoder hidden sizes must be positive");
    add_dense(out, "decoder.fc" + std::to_string(i), width, spec.hidden[i], rng);
    width = spec.hidden[i];
  }
  add_dense(out, "decoder.out", width, spec.output_dim, rng);
  return out;
}

TensorMap<float> init_marginal(const MarginalSpec& spec, Rng& rng) {
  TensorMap<float> out;
  if (spec.kind == MarginalSpec::Kind::fixed_standard_gaussian) return out;
  if (spec.components == 0) throw ConfigError("mixture marginal needs at least one component");
  Tensor means(Shape{spec.components, spec.latent_dim});
  rng.fill_gaussian(means.span());
  out.insert("marginal.means", std::move(means));
  out.insert("marginal.log_stds", Tensor(Shape{spec.components, spec.latent_dim}));
  out.insert("marginal.logits", Tensor(Shape{spec.components}));
  return out;
}

TensorMap<float> init_classifier(const ClassifierSpec& spec, Rng& rng) {
  if (spec.classes < 2) throw ConfigError("classifier needs at least 2 classes");
  TensorMap<float> out;
  std::size_t width = spec.input_dim;
  if (spec.conv) {
    add_conv_trunk(out, "classifier", *spec.conv, rng);
    width = spec.conv->output_dim();
  }
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    add_dense(out, "classifier.fc" + std::to_string(i), width, spec.hidden[i], rng);
    width = spec.hidden[i];
  }
  const auto k = static_cast<std::size_t>(spec.classes);
  out.insert("classifier.out.weight", Tensor(Shape{width, k}));
  out.insert("classifier.out.bias", Tensor(Shape{k}));
  return out;
}

ParamSet init_params(const VaeSpec& spec, std::uint64_t seed) {
  Rng root(seed);
  Rng enc = root.derive("encoder"), dec = root.derive("decoder"), mar = root.derive("marginal");
  ParamSet ps;
  ps.tensors = init_encoder(spec.encoder, enc);
  ps.tensors.merge(init_decoder(spec.decoder, dec));
  ps.tensors.merge(init_marginal(spec.marginal, mar));
  ps.spec_hash = spec_hash(spec.describe());
  ps.init_seed = seed;
  return ps;
}

ParamSet init_params(const ClassifierSpec& spec, std::uint64_t seed) {
  Rng rng = Rng(seed).derive("classifier");
  ParamSet ps;
  ps.tensors = init_classifier(spec, rng);
  ps.spec_hash = spec_hash(spec.describe());
  ps.init_seed = seed;
  return ps;
}

template <class T>
PosteriorVars<T> encode(Graph<T>& g, const TensorMap<T>& params, const EncoderSpec& spec, Var x) {
  const auto& X = g.value(x);
  if (X.rank() != 2 || X.dim(1) != spec.input_dim) {
    throw ShapeError("encode: expected [n," + std::to_string(spec.input_dim) + "], got " +
                     shape_string(X.shape()));
  }
  Var h = x;
  if (spec.kind == EncoderSpec::Kind::conv) {
    h = conv_trunk(g, params, "encoder", spec.conv, h, nullptr);
  } else {
    for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
      h = g.elu(dense(g, params, "encoder.fc" + std::to_string(i), h));
    }
  }
  Var head = dense(g, params, "encoder.head", h);
  const std::size_t l = spec.latent_dim;
  return {g.columns(head, 0, l), g.clamp(g.columns(head, l, 2 * l), T(kLogStdMin), T(kLogStdMax))};
}

template <class T>
Var decode(Graph<T>& g, const TensorMap<T>& params, const DecoderSpec& spec, Var z) {
  const auto& Z = g.value(z);
  if (Z.rank() != 2 || Z.dim(1) != spec.latent_dim) {
    throw ShapeError("decode: expected [n," + std::to_string(spec.latent_dim) + "], got " +
                     shape_string(Z.shape()));
  }
  Var h = z;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    h = g.elu(dense(g, params, "decoder.fc" + std::to_string(i), h));
  }
  return dense(g, params, "decoder.out", h);
}

template <class T>
Var marginal_log_density(Graph<T>& g, const TensorMap<T>& params, const MarginalSpec& spec, Var z) {
  const auto& Z = g.value(z);
  if (Z.rank() != 2 || Z.dim(1) != spec.latent_dim) {
    throw ShapeError("marginal_log_density: expected [n," + std::to_string(spec.latent_dim) +
                     "], got " + shape_string(Z.shape()));
  }
  if (spec.kind == MarginalSpec::Kind::fixed_standard_gaussian) {
    Var zeros = g.constant(BasicTensor<T>(Z.shape()));
    return g.gaussian_log_density(z, zeros, zeros);
  }
  Var means = param_of(g, params, "marginal.means");
  Var log_stds = g.clamp(param_of(g, params, "marginal.log_stds"), T(kLogStdMin), T(kLogStdMax));
  Var log_weights = g.log_softmax(param_of(g, params, "marginal.logits"));
  Var per_component = g.pairwise_gaussian_log_density(z, means, log_stds);
  return g.logsumexp_rows(g.add_row_vector(per_component, log_weights));
}

template <class T>
Var classifier_features(Graph<T>& g, const TensorMap<T>& params, const ClassifierSpec& spec,
                        Var input, Rng* dropout_rng) {
  const auto& X = g.value(input);
  if (X.rank() != 2 || X.dim(1) != spec.input_dim) {
    throw ShapeError("classify: expected [n," + std::to_string(spec.input_dim) + "], got " +
                     shape_string(X.shape()));
  }
  Var h = input;
  if (spec.conv) h = conv_trunk(g, params, "classifier", *spec.conv, h, dropout_rng);
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    h = g.elu(dense(g, params, "classifier.fc" + std::to_string(i), h));
  }
  return h;
}

template <class T>
Var classify(Graph<T>& g, const TensorMap<T>& params, const ClassifierSpec& spec, Var input,
             Rng* dropout_rng) {
  return dense(g, params, "classifier.out", classifier_features(g, params, spec, input, dropout_rng));
}

DiagGaussian encode(const TensorMap<float>& params, const EncoderSpec& spec, const Tensor& x) {
  Graph<float> g;
  auto post = encode(g, params, spec, g.constant(x));
  return {g.value(post.mean), g.value(post.log_std)};
}

Tensor decode(const TensorMap<float>& params, const DecoderSpec& spec, const Tensor& z) {
  Graph<float> g;
  return g.value(decode(g, params, spec, g.constant(z)));
}

Tensor marginal_log_density(const TensorMap<float>& params, const MarginalSpec& spec,
                            const Tensor& z) {
  Graph<float> g;
  return g.value(marginal_log_density(g, params, spec, g.constant(z)));
}

Tensor classify(const TensorMap<float>& params, const ClassifierSpec& spec, const Tensor& input) {
  Graph<float> g;
  return g.value(classify(g, params, spec, g.constant(input)));
}

#define VAEPROBE_INSTANTIATE_MODELS(T)                                                             \
  template PosteriorVars<T> encode<T>(Graph<T>&, const TensorMap<T>&, const EncoderSpec&, Var);    \
  template Var decode<T>(Graph<T>&, const TensorMap<T>&, const DecoderSpec&, Var);                 \
  template Var marginal_log_density<T>(Graph<T>&, const TensorMap<T>&, const MarginalSpec&, Var);  \
  template Var classify<T>(Graph<T>&, const TensorMap<T>&, const ClassifierSpec&, Var, Rng*);      \
  template Var classifier_features<T>(Graph<T>&, const TensorMap<T>&, const ClassifierSpec&, Var,  \
                                      Rng*);

VAEPROBE_INSTANTIATE_MODELS(float)
VAEPROBE_INSTANTIATE_MODELS(double)

#undef VAEPROBE_INSTANTIATE_MODELS

}  // namespace vaeprobe
