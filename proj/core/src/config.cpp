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

#include "vaeprobe/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "vaeprobe/errors.hpp"
#include "vaeprobe/rng.hpp"

namespace vaeprobe {

namespace {

using nlohmann::json;

// Read-only view of one object in the tree that knows its dotted path.
class Node {
 public:
  Node(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw ConfigError(describe() + " must be an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_ && j_->contains(key); }

  void allow(std::initializer_list<const char*> keys) const {
    if (!j_) return;
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : j_->items()) {
      if (!known.count(k)) throw ConfigError("unknown key '" + key_path(k) + "'");
    }
  }

  Node child(const std::string& key) const {
    return Node(has(key) ? &j_->at(key) : nullptr, key_path(key));
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key_path(key) + " must be finite");
    return d;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(key_path(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + " must be a string");
    return v.get<std::string>();
  }

  template <class T>
  T choice(const std::string& key, T fallback, std::initializer_list<std::pair<const char*, T>> options) const {
    if (!has(key)) return fallback;
    const std::string s = string(key, "");
    std::string names;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      names += names.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(key_path(key) + " must be one of: " + names);
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_array()) throw ConfigError(key_path(key) + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "] must be a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_array()) throw ConfigError(key_path(key) + " must be an array of positive integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned() || v[i].get<std::uint64_t>() == 0) {
        throw ConfigError(key_path(key) + "[" + std::to_string(i) + "] must be a positive integer");
      }
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

 private:
  std::string describe() const { return path_.empty() ? "config root" : path_; }
  const json* j_;
  std::string path_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::uint64_t positive(const Node& n, const std::string& key, std::uint64_t fallback) {
  const auto v = n.count(key, fallback);
  require(v >= 1, n.key_path(key) + " must be ≥ 1");
  return v;
}

ConvTrunkSpec parse_conv(const Node& n, ConvTrunkSpec c) {
  n.allow({"layers", "depth", "kernel", "pool_after", "dropout", "channels", "height", "width"});
  c.layers = positive(n, "layers", c.layers);
  c.depth = positive(n, "depth", c.depth);
  c.kernel = positive(n, "kernel", c.kernel);
  require(c.kernel % 2 == 1, n.key_path("kernel") + " must be odd");
  c.pool_after = n.has("pool_after") ? n.sizes("pool_after", {}) : c.pool_after;
  for (auto p : c.pool_after) require(p <= c.layers, n.key_path("pool_after") + " refers to a missing layer");
  c.dropout = n.number("dropout", c.dropout);
  require(c.dropout >= 0.0 && c.dropout < 1.0, n.key_path("dropout") + " must be in [0, 1)");
  c.channels = positive(n, "channels", c.channels);
  c.height = positive(n, "height", c.height);
  c.width = positive(n, "width", c.width);
  try {
    (void)c.output_dim();
  } catch (const ConfigError& e) {
    throw ConfigError(n.key_path("pool_after") + ": " + e.what());
  }
  return c;
}

json conv_json(const ConvTrunkSpec& c) {
  return {{"layers", c.layers}, {"depth", c.depth},       {"kernel", c.kernel},
          {"pool_after", c.pool_after}, {"dropout", c.dropout}, {"channels", c.channels},
          {"height", c.height}, {"width", c.width}};
}

ProbeConfig parse_schedule(const Node& n, ProbeConfig p) {
  p.epochs = n.count("epochs", p.epochs);
  p.lr = n.number("lr", p.lr);
  require(p.lr > 0.0, n.key_path("lr") + " must be > 0");
  p.decay_every = n.count("decay_every", p.decay_every);
  p.decay_factor = n.number("decay_factor", p.decay_factor);
  require(p.decay_factor > 0.0 && p.decay_factor <= 1.0, n.key_path("decay_factor") + " must be in (0, 1]");
  p.batch = positive(n, "batch", p.batch);
  p.eval_samples = positive(n, "samples", p.eval_samples);
  p.seed = n.count("seed", p.seed);
  p.track_train = n.boolean("track_train", p.track_train);
  return p;
}

json schedule_json(const ProbeConfig& p) {
  return {{"epochs", p.epochs}, {"lr", p.lr},     {"decay_every", p.decay_every}, {"decay_factor", p.decay_factor},
          {"batch", p.batch},   {"samples", p.eval_samples}, {"seed", p.seed}, {"track_train", p.track_train}};
}

const char* binarize_name(DatasetConfig::Binarize b) {
  switch (b) {
    case DatasetConfig::Binarize::none: return "none";
    case DatasetConfig::Binarize::threshold: return "threshold";
    case DatasetConfig::Binarize::stochastic: return "stochastic";
  }
  return "none";
}

json to_json(const ExperimentConfig& c, bool include_output) {
  const auto& d = c.dataset;
  json j;
  j["dataset"] = {{"kind", d.kind == DatasetConfig::Kind::idx ? "idx" : "amat"},
                  {"train_images", d.train_images.generic_string()},
                  {"train_labels", d.train_labels.generic_string()},
                  {"test_images", d.test_images.generic_string()},
                  {"test_labels", d.test_labels.generic_string()},
                  {"binarize", {{"mode", binarize_name(d.binarize)}, {"threshold", d.threshold}, {"seed", d.binarize_seed}}},
                  {"classes", d.classes},
                  {"train_limit", d.train_limit},
                  {"test_limit", d.test_limit},
                  {"entropy_nats", d.entropy_nats}};
  const auto& m = c.model;
  j["model"] = {
      {"latent_dim", m.encoder.latent_dim},
      {"encoder",
       {{"kind", m.encoder.kind == EncoderSpec::Kind::mlp ? "mlp" : "conv"},
        {"hidden", m.encoder.hidden},
        {"conv", conv_json(m.encoder.conv)}}},
      {"decoder", {{"hidden", m.decoder.hidden}}},
      {"marginal",
       {{"kind", m.marginal.kind == MarginalSpec::Kind::fixed_standard_gaussian ? "fixed" : "mixture"},
        {"components", m.marginal.components}}}};
  const auto& t = c.train;
  j["train"] = {{"beta", t.beta}, {"epochs", t.epochs}, {"lr", t.lr},
                {"batch", t.batch}, {"seed", t.seed},   {"eval_samples", t.eval_samples}};
  j["probe"] = schedule_json(c.probe);
  j["probe"]["enabled"] = c.probe_enabled;
  const auto& b = c.baselines;
  json sup = schedule_json(b.supervised.schedule);
  sup["kind"] = b.supervised.kind == SupervisedKind::simple_fc ? "simple_fc" : "conv";
  sup["conv"] = conv_json(b.supervised.conv);
  j["baselines"] = {
      {"pca_k", b.pca_k},
      {"pca_sigmas", b.pca_sigmas},
      {"discard_floor", b.discard_floor},
      {"random_encoder",
       {{"kind", b.random_kind == RandomEncoderKind::fully_connected ? "fully_connected" : "convolutional"},
        {"seed", b.random_seed},
        {"conv", conv_json(b.random_conv)}}},
      {"supervised", sup}};
  if (include_output) j["output"] = {{"dir", c.output_dir.generic_string()}};
  return j;
}

ExperimentConfig from_json(const json& root, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  const Node top(&root, "");
  top.allow({"dataset", "model", "train", "probe", "baselines", "output"});
  require(top.has("dataset"), "missing required key 'dataset'");

  const Node ds = top.child("dataset");
  ds.allow({"kind", "train_images", "train_labels", "test_images", "test_labels", "binarize", "classes",
            "train_limit", "test_limit", "entropy_nats"});
  auto& d = c.dataset;
  d.kind = ds.choice<DatasetConfig::Kind>("kind", d.kind, {{"idx", DatasetConfig::Kind::idx}, {"amat", DatasetConfig::Kind::amat}});
  d.train_images = ds.string("train_images", "");
  d.train_labels = ds.string("train_labels", "");
  d.test_images = ds.string("test_images", "");
  d.test_labels = ds.string("test_labels", "");
  require(!d.train_images.empty(), "dataset.train_images is required");
  require(!d.test_images.empty(), "dataset.test_images is required");
  if (d.kind == DatasetConfig::Kind::idx) {
    require(!d.train_labels.empty(), "dataset.train_labels is required for idx data");
    require(!d.test_labels.empty(), "dataset.test_labels is required for idx data");
  }
  const Node bin = ds.child("binarize");
  bin.allow({"mode", "threshold", "seed"});
  d.binarize = bin.choice<DatasetConfig::Binarize>(
      "mode", d.kind == DatasetConfig::Kind::amat ? DatasetConfig::Binarize::none : d.binarize,
      {{"none", DatasetConfig::Binarize::none},
       {"threshold", DatasetConfig::Binarize::threshold},
       {"stochastic", DatasetConfig::Binarize::stochastic}});
  d.threshold = bin.number("threshold", d.threshold);
  require(d.threshold > 0.0 && d.threshold <= 1.0, bin.key_path("threshold") + " must be in (0, 1]");
  d.binarize_seed = bin.count("seed", d.binarize_seed);
  d.classes = static_cast<int>(ds.count("classes", static_cast<std::uint64_t>(d.classes)));
  require(d.classes >= 2, "dataset.classes must be ≥ 2");
  d.train_limit = ds.count("train_limit", d.train_limit);
  d.test_limit = ds.count("test_limit", d.test_limit);
  d.entropy_nats = ds.number("entropy_nats", d.entropy_nats);
  require(d.entropy_nats > 0.0, "dataset.entropy_nats must be > 0");

  const Node mo = top.child("model");
  mo.allow({"latent_dim", "encoder", "decoder", "marginal"});
  auto& m = c.model;
  const Node en = mo.child("encoder");
  en.allow({"kind", "hidden", "conv"});
  m.encoder.kind = en.choice<EncoderSpec::Kind>("kind", m.encoder.kind, {{"mlp", EncoderSpec::Kind::mlp}, {"conv", EncoderSpec::Kind::conv}});
  m.encoder.hidden = en.sizes("hidden", m.encoder.hidden);
  m.encoder.conv = parse_conv(en.child("conv"), m.encoder.conv);
  const Node de = mo.child("decoder");
  de.allow({"hidden"});
  m.decoder.hidden = de.sizes("hidden", m.decoder.hidden);
  const Node ma = mo.child("marginal");
  ma.allow({"kind", "components"});
  m.marginal.kind = ma.choice<MarginalSpec::Kind>(
      "kind", m.marginal.kind,
      {{"fixed", MarginalSpec::Kind::fixed_standard_gaussian}, {"mixture", MarginalSpec::Kind::learned_mixture}});
  m.marginal.components = positive(ma, "components", m.marginal.components);
  m.set_latent_dim(positive(mo, "latent_dim", m.encoder.latent_dim));

  const Node tr = top.child("train");
  tr.allow({"beta", "epochs", "lr", "batch", "seed", "eval_samples"});
  auto& t = c.train;
  t.beta = tr.number("beta", t.beta);
  require(t.beta >= 0.0, "train.beta must be ≥ 0");
  t.epochs = tr.count("epochs", t.epochs);
  t.lr = tr.number("lr", t.lr);
  require(t.lr > 0.0, "train.lr must be > 0");
  t.batch = positive(tr, "batch", t.batch);
  t.seed = tr.count("seed", t.seed);
  t.eval_samples = positive(tr, "eval_samples", t.eval_samples);

  const Node pr = top.child("probe");
  pr.allow({"enabled", "epochs", "lr", "decay_every", "decay_factor", "batch", "samples", "seed", "track_train"});
  c.probe_enabled = pr.boolean("enabled", c.probe_enabled);
  c.probe = parse_schedule(pr, c.probe);

  const Node ba = top.child("baselines");
  ba.allow({"pca_k", "pca_sigmas", "discard_floor", "random_encoder", "supervised"});
  auto& b = c.baselines;
  b.pca_k = positive(ba, "pca_k", b.pca_k);
  b.pca_sigmas = ba.numbers("pca_sigmas", b.pca_sigmas);
  require(!b.pca_sigmas.empty(), "baselines.pca_sigmas must not be empty");
  for (double s : b.pca_sigmas) require(s > 0.0, "baselines.pca_sigmas entries must be > 0");
  b.discard_floor = ba.number("discard_floor", b.discard_floor);
  require(b.discard_floor >= 0.0 && b.discard_floor <= std::log(static_cast<double>(d.classes)),
          "baselines.discard_floor must be in [0, ln classes]");
  const Node re = ba.child("random_encoder");
  re.allow({"kind", "seed", "conv"});
  b.random_kind = re.choice<RandomEncoderKind>(
      "kind", b.random_kind,
      {{"fully_connected", RandomEncoderKind::fully_connected}, {"convolutional", RandomEncoderKind::convolutional}});
  b.random_seed = re.count("seed", b.random_seed);
  b.random_conv = parse_conv(re.child("conv"), b.random_conv);
  const Node su = ba.child("supervised");
  su.allow({"kind", "conv", "epochs", "lr", "decay_every", "decay_factor", "batch", "samples", "seed", "track_train"});
  b.supervised.kind = su.choice<SupervisedKind>("kind", b.supervised.kind,
                                                {{"simple_fc", SupervisedKind::simple_fc}, {"conv", SupervisedKind::conv}});
  b.supervised.conv = parse_conv(su.child("conv"), b.supervised.conv);
  b.supervised.schedule = parse_schedule(su, b.supervised.schedule);

  const Node out = top.child("output");
  out.allow({"dir"});
  c.output_dir = out.string("dir", c.output_dir.string());
  require(!c.output_dir.empty(), "output.dir must not be empty");
  return c;
}

}  // namespace

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

EntropyConstants ExperimentConfig::constants() const {
  return {dataset.entropy_nats, std::log(static_cast<double>(dataset.classes))};
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ConfigError("config is empty");
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto at = msg.find("parse error");
    throw ConfigError("config syntax error: " + (at == std::string::npos ? msg : msg.substr(at)));
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  return from_json(root, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string canonical_config(const ExperimentConfig& config, bool include_output) {
  return to_json(config, include_output).dump();
}

std::string run_id(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config(config, false))));
  return buf;
}

}  // namespace vaeprobe
