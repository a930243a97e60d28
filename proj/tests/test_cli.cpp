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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "test_support.hpp"
#include "vaeprobe/csv.hpp"
#include "vaeprobe/datasets.hpp"

using namespace vaeprobe;
using vaeprobe::testing::TempDir;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VAEPROBE_CLI) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto train = vaeprobe::testing::synthetic_binary(48, 16, 4, 1);
    const auto test = vaeprobe::testing::synthetic_binary(24, 16, 4, 2);
    write_idx_images(dir / "train-images", train, 4, 4);
    write_idx_labels(dir / "train-labels", *train.labels);
    write_idx_images(dir / "test-images", test, 4, 4);
    write_idx_labels(dir / "test-labels", *test.labels);
  }

  std::string config(const std::string& train_images = "train-images", double lr = 1e-3) {
    const auto path = dir / "config.json";
    write_text(path, R"({"dataset": {"train_images": ")" + train_images +
                         R"(", "train_labels": "train-labels", "test_images": "test-images",
                     "test_labels": "test-labels", "classes": 4, "binarize": {"mode": "none"}},
         "model": {"latent_dim": 2, "encoder": {"hidden": [8]}, "decoder": {"hidden": [8]}},
         "train": {"epochs": 1, "batch": 16, "lr": )" + std::to_string(lr) +
                         R"(}, "probe": {"epochs": 1, "batch": 16, "samples": 2},
         "baselines": {"pca_k": 3, "pca_sigmas": [1.0]},
         "output": {"dir": "out"}})");
    return path.string();
  }

  TempDir dir{"cli"};
};

}  // namespace

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_NE(run_cli(""), 0);
  EXPECT_EQ(run_cli("no-such-command"), 1);
}

TEST_F(CliTest, TrainProbeAndReport) {
  const auto cfg = config() + " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("train --config " + cfg), 0);
  EXPECT_EQ(run_cli("train --config " + cfg), 0);
  EXPECT_EQ(run_cli("probe --config " + cfg), 0);
  EXPECT_EQ(run_cli("baseline pca --config " + cfg), 0);
  EXPECT_EQ(run_cli("baseline discard-line --config " + cfg), 0);
  EXPECT_EQ(run_cli("sweep --config " + cfg + " --betas 1,2 --seeds 0"), 0);
  EXPECT_EQ(run_cli("report --config " + config() + " --out " + (dir / "report").string() + " " +
                    (dir / "out").string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "c_vs_r.csv"));
}

TEST_F(CliTest, ExitCodes) {
  write_text(dir / "bad.json", R"({"dataset": {}, "train": {"beta": -1}})");
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.json").string()), 1);
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("train --config " + config("missing-file") + out), 2);
  EXPECT_EQ(run_cli("train --config " + config("train-images", 1e30) + out), 3);
  EXPECT_EQ(run_cli("check-grads --cases 2"), 0);
}
