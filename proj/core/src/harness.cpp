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

#include "vaeprobe/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <json.hpp>
#include <mutex>
#include <set>
#include <thread>

#include "vaeprobe/errors.hpp"
#include "vaeprobe/param_io.hpp"

#ifndef VAEPROBE_VERSION
#define VAEPROBE_VERSION "0.0.0"
#endif

namespace vaeprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double bits(double nats) { return nats / std::log(2.0); }

DatasetSplit load_split(const ExperimentConfig& c, const fs::path& images, const fs::path& labels,
                        const std::string& name, std::size_t limit) {
  const auto& d = c.dataset;
  DatasetSplit s;
  if (d.kind == DatasetConfig::Kind::idx) {
    s = load_idx(c.resolve(images), c.resolve(labels), d.classes);
  } else {
    s = load_amat(c.resolve(images));
    if (!labels.empty()) attach_labels(s, load_label_sidecar(c.resolve(labels)), d.classes);
  }
  s.name = name;
  if (limit > 0) s = s.head(limit);
  switch (d.binarize) {
    case DatasetConfig::Binarize::none: break;
    case DatasetConfig::Binarize::threshold: s = binarize(s, BinarizeMode::thresholded(d.threshold)); break;
    case DatasetConfig::Binarize::stochastic:
      s = binarize(s, BinarizeMode::sampled(Rng(d.binarize_seed).derive(name).next_u64()));
      break;
  }
  s.validate(true);
  return s;
}

// Input and output widths follow the data.
VaeSpec model_for(const ExperimentConfig& c, const DatasetSplit& train) {
  VaeSpec spec = c.model;
  spec.encoder.input_dim = train.cols;
  spec.decoder.output_dim = train.cols;
  return spec;
}

json manifest_config(const ExperimentConfig& c) { return json::parse(canonical_config(c, true)); }

std::vector<std::string> metrics_row(const RunMetrics& m) {
  return {m.run_id,
          format_number(m.beta),
          std::to_string(m.epoch),
          format_number(m.rate_nats),
          format_number(m.distortion_nats),
          format_number(m.loss),
          format_number(m.label_distortion_nats),
          format_number(m.accuracy),
          format_number(m.compression_factor)};
}

CsvTable probe_table(const ProbeResult& r) {
  CsvTable t{{"epoch", "lr", "train_c_nats", "test_c_nats", "test_c_bits", "test_accuracy"}, {}};
  for (const auto& e : r.history) {
    t.rows.push_back({std::to_string(e.epoch), format_number(e.lr), format_number(e.train_c),
                      format_number(e.test_c), format_number(bits(e.test_c)), format_number(e.test_accuracy)});
  }
  return t;
}

ProbeResult probe_vae(const ExperimentConfig& config, const VaeSpec& spec,
                      const TensorMap<float>& params, const ExperimentData& data) {
  if (!data.train.labels || !data.test.labels) {
    throw DataError("probe requires labels for both splits (dataset.train_labels / test_labels)");
  }
  const auto train = vae_encoding(params, spec.encoder, data.train);
  const auto test = vae_encoding(params, spec.encoder, data.test);
  return probe_label_distortion(train, *data.train.labels, test, *data.test.labels,
                                config.dataset.classes, config.probe);
}

// Subset of the tree that determines a baseline's result.
std::string baseline_hash(const ExperimentConfig& c, const std::string& kind) {
  const json full = manifest_config(c);
  const json subset = {{"kind", kind}, {"dataset", full["dataset"]}, {"probe", full["probe"]},
                       {"baselines", full["baselines"]}};
  return hex16(fnv1a64(subset.dump()));
}

fs::path baseline_dir(const ExperimentConfig& c, const std::string& kind) {
  return c.output_dir / "baselines" / (kind + "-" + baseline_hash(c, kind));
}

void write_baseline_manifest(const fs::path& dir, const ExperimentConfig& c, const std::string& kind,
                             const json& extra) {
  json m = {{"kind", kind}, {"tool_version", tool_version()}, {"config", manifest_config(c)}};
  m.update(extra);
  write_text(dir / "baseline.json", m.dump(2) + "\n");
}

std::vector<std::string> baseline_row(const std::string& source, const std::string& id,
                                      double c_nats, double accuracy) {
  return {source, id, "", "", "", format_number(c_nats), format_number(bits(c_nats)),
          format_number(accuracy), ""};
}

const std::vector<std::string> kBaselineColumns = {"source", "run_id", "beta", "R_nats", "D_nats",
                                                   "C_nats", "C_bits", "accuracy", "compression_factor"};

}  // namespace

std::string tool_version() { return VAEPROBE_VERSION; }

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {"run_id", "beta", "epoch", "rate_nats", "distortion_nats",
                                                "loss", "label_distortion_nats", "accuracy",
                                                "compression_factor"};
  return cols;
}

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  const auto& d = config.dataset;
  return {load_split(config, d.train_images, d.train_labels, "train", d.train_limit),
          load_split(config, d.test_images, d.test_labels, "test", d.test_limit)};
}

RunRecord read_run(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  RunRecord r;
  r.dir = dir;
  r.run_id = m.value("run_id", "");
  r.status = m.value("status", "failed");
  r.diagnostic = m.value("diagnostic", "");
  r.beta = m.at("config").at("train").at("beta").get<double>();
  r.seed = m.at("config").at("train").at("seed").get<std::uint64_t>();
  if (fs::exists(dir / "metrics.csv")) {
    const auto t = read_csv(dir / "metrics.csv");
    if (t.header != metrics_columns()) throw DataError((dir / "metrics.csv").string() + ": unexpected header");
    if (!t.rows.empty()) r.final_row = t.rows.back();
  }
  return r;
}

RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_experiment(config, load_experiment_data(config), options);
}

RunRecord run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                         const RunOptions& options) {
  const std::string id = run_id(config);
  const fs::path dir = config.output_dir / id;
  if (!options.force && fs::exists(dir / "manifest.json")) {
    RunRecord existing = read_run(dir);
    if (existing.status == "completed") {
      existing.skipped = true;
      return existing;
    }
  }
  fs::create_directories(dir);
  for (const char* f : {"manifest.json", "metrics.csv", "probe.csv", "weights.ipw"}) fs::remove(dir / f);

  json manifest = {{"run_id", id},
                   {"tool_version", tool_version()},
                   {"seed", config.train.seed},
                   {"config", manifest_config(config)},
                   {"started_at", utc_now()},
                   {"defaults",
                    {{"vae_schedule", "implementation default (Adam, batch, lr, epochs from train.*)"},
                     {"adam", {{"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}}},
                     {"probe_eval_samples", config.probe.eval_samples},
                     {"probe_batch", config.probe.batch}}}};
  auto finish = [&](const std::string& status, const std::string& diagnostic) {
    manifest["status"] = status;
    manifest["diagnostic"] = diagnostic;
    manifest["finished_at"] = utc_now();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  };

  try {
    const VaeSpec spec = model_for(config, data.train);
    TrainResult tr = train_vae(spec, config.train, data.train, data.test, config.constants());
    for (auto& m : tr.history) m.run_id = id;
    if (tr.status == RunStatus::completed) {
      save_params(dir / "weights.ipw", tr.params.tensors);
      if (config.probe_enabled) {
        const ProbeResult pr = probe_vae(config, spec, tr.params.tensors, data);
        write_csv(dir / "probe.csv", probe_table(pr));
        tr.history.back().label_distortion_nats = pr.label_distortion_nats;
        tr.history.back().accuracy = pr.accuracy;
        manifest["probe"] = {{"c_nats", pr.label_distortion_nats}, {"accuracy", pr.accuracy},
                             {"samples", pr.samples}};
      }
    }
    CsvTable metrics{metrics_columns(), {}};
    for (const auto& m : tr.history) metrics.rows.push_back(metrics_row(m));
    write_csv(dir / "metrics.csv", metrics);
    finish(to_string(tr.status), tr.diagnostic);
  } catch (const std::exception& e) {
    finish("failed", e.what());
    throw;
  }
  return read_run(dir);
}

ProbeResult reprobe_run(const ExperimentConfig& config, const fs::path& run_dir) {
  const ExperimentData data = load_experiment_data(config);
  const VaeSpec spec = model_for(config, data.train);
  const ParamSet expected = init_params(spec, config.train.seed);
  const auto params = load_params(run_dir / "weights.ipw", expected.tensors);
  ProbeResult pr = probe_vae(config, spec, params, data);
  write_csv(run_dir / "probe.csv", probe_table(pr));
  return pr;
}

SweepResult sweep(const ExperimentConfig& base, std::span<const double> betas,
                  std::span<const std::uint64_t> seeds, std::size_t threads, const RunOptions& options) {
  if (betas.empty() || seeds.empty()) throw ConfigError("sweep needs at least one beta and one seed");
  std::vector<ExperimentConfig> configs;
  std::set<std::string> ids;
  std::string key = canonical_config(base, false);
  for (double b : betas) {
    if (!(b >= 0.0)) throw ConfigError("sweep betas must be ≥ 0");
    for (auto s : seeds) {
      ExperimentConfig c = base;
      c.train.beta = b;
      c.train.seed = s;
      if (!ids.insert(run_id(c)).second) throw ConfigError("sweep lists the same (beta, seed) twice");
      configs.push_back(std::move(c));
      key += "|" + format_number(b) + ":" + std::to_string(s);
    }
  }

  SweepResult result;
  result.sweep_id = hex16(fnv1a64(key));
  result.dir = base.output_dir / ("sweep-" + result.sweep_id);
  result.runs.resize(configs.size());

  const ExperimentData data = load_experiment_data(base);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        result.runs[i] = run_experiment(configs[i], data, options);
      } catch (const std::exception& e) {
        RunRecord r;
        r.run_id = run_id(configs[i]);
        r.dir = configs[i].output_dir / r.run_id;
        r.status = "failed";
        r.diagnostic = e.what();
        r.beta = configs[i].train.beta;
        r.seed = configs[i].train.seed;
        result.runs[i] = std::move(r);
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, configs.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  CsvTable table{{"run_id", "beta", "seed", "status", "epoch", "rate_nats", "distortion_nats", "loss",
                  "label_distortion_nats", "accuracy", "compression_factor"},
                 {}};
  for (const auto& r : result.runs) {
    std::vector<std::string> row = {r.run_id, format_number(r.beta), std::to_string(r.seed), r.status};
    if (r.final_row.empty()) {
      row.resize(table.header.size());
    } else {
      row.insert(row.end(), r.final_row.begin() + 2, r.final_row.end());
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(result.dir / "sweep.csv", table);
  return result;
}

fs::path run_pca_baseline(const ExperimentConfig& config, const ExperimentData& data) {
  const auto& b = config.baselines;
  if (!data.train.labels || !data.test.labels) throw DataError("pca baseline requires labeled splits");
  const fs::path dir = baseline_dir(config, "pca");
  const PcaBasis basis = fit_pca(data.train, b.pca_k);
  const double h_x = config.dataset.entropy_nats;
  CsvTable t{{"source", "k", "sigma", "R_nats", "C_nats", "C_bits", "accuracy", "compression_factor"}, {}};
  std::vector<double> sigmas = b.pca_sigmas;
  std::sort(sigmas.begin(), sigmas.end());
  for (double sigma : sigmas) {
    const double rate = pca_rate(b.pca_k, sigma);
    const auto pr = probe_label_distortion(pca_encoding(basis, data.train, sigma), *data.train.labels,
                                           pca_encoding(basis, data.test, sigma), *data.test.labels,
                                           config.dataset.classes, config.probe);
    t.rows.push_back({"pca", std::to_string(b.pca_k), format_number(sigma), format_number(rate),
                      format_number(pr.label_distortion_nats), format_number(bits(pr.label_distortion_nats)),
                      format_number(pr.accuracy), format_number(compression_factor(rate, h_x))});
  }
  write_csv(dir / "pca_frontier.csv", t);
  json eig = basis.eigenvalues;
  write_baseline_manifest(dir, config, "pca", {{"eigenvalues", eig}});
  return dir;
}

fs::path run_random_encoder_baseline(const ExperimentConfig& config, const ExperimentData& data) {
  const auto& b = config.baselines;
  if (!data.train.labels || !data.test.labels) throw DataError("random encoder baseline requires labeled splits");
  const bool fc = b.random_kind == RandomEncoderKind::fully_connected;
  const std::string kind = fc ? "random_fc" : "random_conv";
  const fs::path dir = baseline_dir(config, kind);
  auto features = [&](const DatasetSplit& s) {
    return GaussianEncoding::deterministic(random_encoder(b.random_kind, b.random_seed, s, b.random_conv));
  };
  const auto pr = probe_label_distortion(features(data.train), *data.train.labels, features(data.test),
                                         *data.test.labels, config.dataset.classes, config.probe);
  write_csv(dir / "probe.csv", probe_table(pr));
  write_csv(dir / "baseline.csv",
            CsvTable{kBaselineColumns, {baseline_row(kind, dir.filename().string(), pr.label_distortion_nats, pr.accuracy)}});
  write_baseline_manifest(dir, config, kind, {{"c_nats", pr.label_distortion_nats}, {"accuracy", pr.accuracy}});
  return dir;
}

fs::path run_supervised_baseline(const ExperimentConfig& config, const ExperimentData& data) {
  const auto& s = config.baselines.supervised;
  const std::string kind = s.kind == SupervisedKind::simple_fc ? "supervised_fc" : "supervised_conv";
  const fs::path dir = baseline_dir(config, kind);
  const auto r = train_supervised_baseline(s.kind, data.train, data.test, s.schedule, s.conv);
  fs::create_directories(dir);
  save_params(dir / "weights.ipw", r.params.tensors);
  ProbeResult as_probe;
  as_probe.history = r.history;
  write_csv(dir / "probe.csv", probe_table(as_probe));
  write_csv(dir / "baseline.csv",
            CsvTable{kBaselineColumns, {baseline_row(kind, dir.filename().string(), r.label_distortion_nats, r.accuracy)}});
  write_baseline_manifest(dir, config, kind,
                          {{"c_nats", r.label_distortion_nats}, {"accuracy", r.accuracy}, {"spec", r.spec.describe()}});
  return dir;
}

CsvTable discard_line_table(const ExperimentConfig& config, std::size_t points) {
  const DiscardLine line(config.constants(), config.baselines.discard_floor);
  CsvTable t{{"R_nats", "C_nats", "C_bits"}, {}};
  for (const auto& [r, c] : line.sample(points)) {
    t.rows.push_back({format_number(r), format_number(c), format_number(bits(c))});
  }
  return t;
}

fs::path run_discard_line(const ExperimentConfig& config) {
  const fs::path dir = baseline_dir(config, "discard_line");
  write_csv(dir / "discard_line.csv", discard_line_table(config));
  return dir;
}

}  // namespace vaeprobe
