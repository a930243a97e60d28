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

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>

#include "vaeprobe/baselines.hpp"
#include "vaeprobe/config.hpp"
#include "vaeprobe/errors.hpp"
#include "vaeprobe/gradcheck.hpp"
#include "vaeprobe/harness.hpp"
#include "vaeprobe/naive_bayes.hpp"
#include "vaeprobe/report.hpp"

namespace fs = std::filesystem;
using namespace vaeprobe;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_force) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (overrides output.dir)");
  cmd->add_option("--seed", c.seed, "Seed (overrides train.seed)");
  if (with_force) cmd->add_flag("--force", c.force, "Recompute even if the run already completed");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig config = load_config(c.config);
  if (!c.out.empty()) config.output_dir = c.out;
  if (c.seed) config.train.seed = *c.seed;
  return config;
}

std::string cell(const std::vector<std::string>& row, std::size_t i) {
  return i < row.size() && !row[i].empty() ? row[i] : "-";
}

void print_run(const RunRecord& r) {
  std::printf("%s  %s%s\n", r.dir.string().c_str(), r.status.c_str(), r.skipped ? " (already complete)" : "");
  if (!r.final_row.empty()) {
    const auto& f = r.final_row;
    std::printf("  epoch %s  R %s nats  D %s nats  C %s nats  accuracy %s\n", cell(f, 2).c_str(),
                cell(f, 3).c_str(), cell(f, 4).c_str(), cell(f, 6).c_str(), cell(f, 7).c_str());
  }
  if (!r.diagnostic.empty()) std::printf("  %s\n", r.diagnostic.c_str());
}

int status_code(const std::string& status) {
  if (status == "completed") return kExitOk;
  if (status == "aborted-nan") return kExitAborted;
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate, distortion and label-distortion experiments for beta-VAEs"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Common common;
  std::function<int()> action;

  auto* train = app.add_subcommand("train", "Train a VAE, probe it, and write a run directory");
  add_common(train, common, true);
  train->callback([&] {
    action = [&] {
      const auto r = run_experiment(load(common), RunOptions{common.force});
      print_run(r);
      return status_code(r.status);
    };
  });

  std::string run_dir;
  auto* probe = app.add_subcommand("probe", "Retrain the label probe of an existing run");
  add_common(probe, common, false);
  probe->add_option("--run", run_dir, "Run directory (default: derived from the config)");
  probe->callback([&] {
    action = [&] {
      const auto config = load(common);
      const fs::path dir = run_dir.empty() ? config.output_dir / run_id(config) : fs::path(run_dir);
      const auto pr = reprobe_run(config, dir);
      std::printf("%s  C %s nats  accuracy %s  (S=%zu)\n", (dir / "probe.csv").string().c_str(),
                  format_number(pr.label_distortion_nats).c_str(), format_number(pr.accuracy).c_str(), pr.samples);
      return kExitOk;
    };
  });

  std::string baseline_kind;
  auto* baseline = app.add_subcommand("baseline", "Compute a reference curve or point");
  baseline->add_option("kind", baseline_kind, "pca | random-encoder | supervised | discard-line")
      ->required()
      ->check(CLI::IsMember({"pca", "random-encoder", "supervised", "discard-line"}));
  add_common(baseline, common, false);
  baseline->callback([&] {
    action = [&] {
      auto config = load(common);
      if (common.seed) {
        config.probe.seed = *common.seed;
        config.baselines.random_seed = *common.seed;
        config.baselines.supervised.schedule.seed = *common.seed;
      }
      fs::path dir;
      if (baseline_kind == "discard-line") {
        dir = run_discard_line(config);
      } else {
        const auto data = load_experiment_data(config);
        if (baseline_kind == "pca") dir = run_pca_baseline(config, data);
        if (baseline_kind == "random-encoder") dir = run_random_encoder_baseline(config, data);
        if (baseline_kind == "supervised") dir = run_supervised_baseline(config, data);
      }
      std::printf("%s\n", dir.string().c_str());
      return kExitOk;
    };
  });

  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
  auto* sw = app.add_subcommand("sweep", "Run every (beta, seed) pair and write sweep.csv");
  add_common(sw, common, true);
  sw->add_option("--betas", betas, "Beta values")->required()->delimiter(',');
  sw->add_option("--seeds", seeds, "Seeds (default: train.seed)")->delimiter(',');
  sw->add_option("--threads", threads, "Concurrent runs")->check(CLI::PositiveNumber);
  sw->callback([&] {
    action = [&] {
      const auto config = load(common);
      if (seeds.empty()) seeds.push_back(config.train.seed);
      const auto result = sweep(config, betas, seeds, threads, RunOptions{common.force});
      int code = kExitOk;
      for (const auto& r : result.runs) {
        print_run(r);
        if (r.status != "completed") code = status_code(r.status);
      }
      std::printf("%s\n", (result.dir / "sweep.csv").string().c_str());
      return code;
    };
  });

  std::vector<std::string> inputs;
  std::string report_config;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "Collect runs and baselines into plot-ready CSVs");
  rep->add_option("--config", report_config, "Config supplying entropies and the discard floor")
      ->required()
      ->check(CLI::ExistingFile);
  rep->add_option("--out", report_out, "Report directory")->required();
  rep->add_option("inputs", inputs, "Run, sweep, or baseline directories (default: output.dir)");
  rep->callback([&] {
    action = [&] {
      const auto config = load_config(report_config);
      std::vector<fs::path> dirs(inputs.begin(), inputs.end());
      if (dirs.empty()) dirs.push_back(config.output_dir);
      const auto s = emit_report(dirs, config, report_out);
      std::printf("%s  %zu runs, %zu pca points, %zu other baselines\n", s.dir.string().c_str(), s.runs,
                  s.pca_points, s.baseline_rows);
      return kExitOk;
    };
  });

  std::size_t cases = 50;
  std::uint64_t grad_seed = 0;
  double tolerance = 1e-4;
  auto* grads = app.add_subcommand("check-grads", "Finite-difference check of every primitive");
  grads->add_option("--cases", cases, "Random inputs per primitive")->check(CLI::PositiveNumber);
  grads->add_option("--seed", grad_seed, "Seed");
  grads->add_option("--tolerance", tolerance, "Maximum relative error");
  grads->callback([&] {
    action = [&] {
      GradCheckOptions opt;
      opt.tolerance = tolerance;
      bool ok = true;
      for (const auto& r : check_primitives(cases, grad_seed, opt)) {
        std::printf("%-32s %4zu cases  max rel err %.3e  %s\n", r.primitive.c_str(), r.cases, r.max_rel_error,
                    r.passed ? "ok" : "FAIL");
        ok = ok && r.passed;
      }
      return ok ? kExitOk : kExitAborted;
    };
  });

  auto* data = app.add_subcommand("data", "Dataset preparation");
  data->require_subcommand(1);
  std::string images, labels, out_path, ref_images, ref_labels, amat;
  std::uint64_t bin_seed = 0;
  auto* bin = data->add_subcommand("binarize", "Stochastically binarize IDX images into an amat file");
  bin->add_option("--images", images, "IDX image file")->required()->check(CLI::ExistingFile);
  bin->add_option("--out", out_path, "Output amat file")->required();
  bin->add_option("--seed", bin_seed, "Binarization seed");
  bin->callback([&] {
    action = [&] {
      const auto split = binarize(load_idx_images(images), BinarizeMode::sampled(bin_seed));
      write_amat(out_path, split);
      std::printf("%s  %zu rows\n", out_path.c_str(), split.rows);
      return kExitOk;
    };
  });
  auto* transfer = data->add_subcommand("transfer-labels",
                                        "Label amat rows with a Bernoulli naive Bayes fit on labeled IDX data");
  transfer->add_option("--reference-images", ref_images, "Labeled IDX images")->required()->check(CLI::ExistingFile);
  transfer->add_option("--reference-labels", ref_labels, "IDX labels")->required()->check(CLI::ExistingFile);
  transfer->add_option("--amat", amat, "Unlabeled binary amat file")->required()->check(CLI::ExistingFile);
  transfer->add_option("--out", out_path, "Label sidecar to write")->required();
  transfer->callback([&] {
    action = [&] {
      const auto reference = binarize(load_idx(ref_images, ref_labels), BinarizeMode::thresholded());
      const auto model = naive_bayes_fit(reference);
      const auto target = load_amat(amat, reference.cols);
      const auto y = naive_bayes_transfer_labels(model, target);
      write_label_sidecar(out_path, y);
      std::printf("%s  %zu labels (reference accuracy %.4f)\n", out_path.c_str(), y.size(),
                  naive_bayes_accuracy(model, reference));
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitAborted;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitData;
  }
}
