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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "test_support.hpp"
#include "vaeprobe/datasets.hpp"
#include "vaeprobe/errors.hpp"
#include "vaeprobe/naive_bayes.hpp"

using namespace vaeprobe;
using vaeprobe::testing::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> be32(std::uint32_t v) {
  return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
}

std::vector<unsigned char> idx_images(std::uint32_t magic, std::uint32_t n, std::uint32_t h,
                                      std::uint32_t w, const std::vector<unsigned char>& pixels) {
  std::vector<unsigned char> out;
  for (auto v : {magic, n, h, w}) {
    const auto b = be32(v);
    out.insert(out.end(), b.begin(), b.end());
  }
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

DatasetSplit split_of(std::vector<float> images, std::size_t cols) {
  DatasetSplit s;
  s.name = "t";
  s.cols = cols;
  s.rows = images.size() / cols;
  s.images = std::move(images);
  return s;
}

}  // namespace

TEST(Idx, HandBuiltImageFile) {
  TempDir dir("idx");
  write_bytes(dir / "img", idx_images(0x803, 1, 2, 2, {0, 255, 0, 255}));
  const auto s = load_idx_images(dir / "img");
  EXPECT_EQ(s.rows, 1u);
  EXPECT_EQ(s.cols, 4u);
  EXPECT_EQ(s.images, (std::vector<float>{0, 1, 0, 1}));
}

TEST(Idx, WrongMagicIsRejected) {
  TempDir dir("idx");
  write_bytes(dir / "img", idx_images(0x802, 1, 2, 2, {0, 0, 0, 0}));
  try {
    load_idx_images(dir / "img");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unrecognized IDX magic"), std::string::npos);
  }
}

TEST(Idx, TruncatedAndOversizedFilesAreRejected) {
  TempDir dir("idx");
  write_bytes(dir / "short", idx_images(0x803, 2, 2, 2, {0, 0, 0, 0}));
  EXPECT_THROW(load_idx_images(dir / "short"), DataError);
  write_bytes(dir / "long", idx_images(0x803, 1, 2, 2, {0, 0, 0, 0, 0}));
  EXPECT_THROW(load_idx_images(dir / "long"), DataError);
  write_bytes(dir / "header", {0, 0, 8});
  EXPECT_THROW(load_idx_images(dir / "header"), DataError);
  EXPECT_THROW(load_idx_images(dir / "missing"), IoError);
}

TEST(Idx, RoundTripWithLabels) {
  TempDir dir("idx");
  auto s = vaeprobe::testing::synthetic_binary(12, 16, 4, 1);
  write_idx_images(dir / "img", s, 4, 4);
  write_idx_labels(dir / "lbl", *s.labels);
  const auto back = load_idx(dir / "img", dir / "lbl", 4);
  EXPECT_EQ(back.images, s.images);
  EXPECT_EQ(back.labels, s.labels);

  write_idx_labels(dir / "short", std::vector<int>{0, 1});
  EXPECT_THROW(load_idx(dir / "img", dir / "short", 4), DataError);
  write_idx_labels(dir / "range", std::vector<int>(12, 7));
  EXPECT_THROW(load_idx(dir / "img", dir / "range", 4), DataError);
}

TEST(Idx, LoadingIsPure) {
  TempDir dir("idx");
  const auto s = vaeprobe::testing::synthetic_binary(5, 9, 3, 2);
  write_idx_images(dir / "img", s, 3, 3);
  EXPECT_EQ(load_idx_images(dir / "img").images, load_idx_images(dir / "img").images);
}

TEST(Amat, ZeroRowParses) {
  TempDir dir("amat");
  {
    std::ofstream out(dir / "z.amat");
    for (int i = 0; i < 784; ++i) out << (i ? " 0" : "0");
    out << "\n";
  }
  const auto s = load_amat(dir / "z.amat");
  EXPECT_EQ(s.rows, 1u);
  EXPECT_EQ(s.cols, 784u);
  EXPECT_TRUE(std::all_of(s.images.begin(), s.images.end(), [](float v) { return v == 0.0f; }));
}

TEST(Amat, ShortRowNamesTheLine) {
  TempDir dir("amat");
  {
    std::ofstream out(dir / "s.amat");
    for (int i = 0; i < 784; ++i) out << "1 ";
    out << "\n";
    for (int i = 0; i < 783; ++i) out << "0 ";
    out << "\n";
  }
  try {
    load_amat(dir / "s.amat");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(Amat, NonBinaryValueIsRejectedAndRoundTripHolds) {
  TempDir dir("amat");
  {
    std::ofstream out(dir / "b.amat");
    out << "0 1 0.5 1\n";
  }
  EXPECT_THROW(load_amat(dir / "b.amat", 4), DataError);
  const auto s = vaeprobe::testing::synthetic_binary(7, 8, 2, 3);
  write_amat(dir / "r.amat", s);
  EXPECT_EQ(load_amat(dir / "r.amat", 8).images, s.images);

  write_label_sidecar(dir / "r.labels", *s.labels);
  EXPECT_EQ(load_label_sidecar(dir / "r.labels"), *s.labels);
}

TEST(Binarize, ThresholdAndIdentityOnBinary) {
  const auto s = split_of({0.5f, 0.49f, 0.0f, 1.0f}, 4);
  EXPECT_EQ(binarize(s, BinarizeMode::thresholded()).images, (std::vector<float>{1, 0, 0, 1}));
  const auto zeros = split_of(std::vector<float>(8, 0.0f), 4);
  EXPECT_EQ(binarize(zeros, BinarizeMode::sampled(3)).images, zeros.images);
  EXPECT_EQ(binarize(zeros, BinarizeMode::thresholded()).images, zeros.images);
}

TEST(Binarize, StochasticIsSeededAndUnbiased) {
  const auto s = split_of(std::vector<float>(20000, 0.3f), 100);
  const auto a = binarize(s, BinarizeMode::sampled(5));
  EXPECT_EQ(a.images, binarize(s, BinarizeMode::sampled(5)).images);
  EXPECT_NE(a.images, binarize(s, BinarizeMode::sampled(6)).images);
  EXPECT_TRUE(a.is_binary());
  const double mean = std::accumulate(a.images.begin(), a.images.end(), 0.0) / 20000.0;
  EXPECT_NEAR(mean, 0.3, 0.015);
  EXPECT_THROW(binarize(split_of({1.5f}, 1), BinarizeMode::thresholded()), DataError);
}

TEST(Batches, ShortLastBatch) {
  const auto b = iterate_batches(5, 2, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].size(), 2u);
  EXPECT_EQ(b[1].size(), 2u);
  EXPECT_EQ(b[2].size(), 1u);
  EXPECT_EQ(sequential_batches(5, 2)[2], std::vector<std::size_t>{4});
  EXPECT_THROW(iterate_batches(5, 0, 0), Error);
}

TEST(Batches, EachEpochIsAPermutation) {
  for (std::uint64_t epoch = 0; epoch < 5; ++epoch) {
    std::multiset<std::size_t> seen;
    for (const auto& batch : iterate_batches(103, 10, 42, epoch)) seen.insert(batch.begin(), batch.end());
    ASSERT_EQ(seen.size(), 103u);
    std::size_t i = 0;
    for (auto v : seen) EXPECT_EQ(v, i++);
  }
  EXPECT_EQ(iterate_batches(50, 8, 1, 3), iterate_batches(50, 8, 1, 3));
  EXPECT_NE(iterate_batches(50, 8, 1, 3), iterate_batches(50, 8, 1, 4));
}

TEST(NaiveBayes, SmoothingOnSingleClass) {
  auto s = split_of({1, 1, 1}, 3);
  attach_labels(s, {0}, 1);
  const auto m = naive_bayes_fit(s, 1.0);
  for (double lp : m.log_p1) EXPECT_NEAR(std::exp(lp), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.log_prior[0], 0.0, 1e-15);
}

TEST(NaiveBayes, BalancedPriors) {
  auto s = split_of({1, 0, 1, 0}, 1);
  attach_labels(s, {0, 1, 0, 1}, 2);
  const auto m = naive_bayes_fit(s);
  EXPECT_NEAR(m.log_prior[0], std::log(0.5), 1e-15);
  EXPECT_NEAR(m.log_prior[1], std::log(0.5), 1e-15);
}

TEST(NaiveBayes, OnePixelPosterior) {
  // Class 0 always on, class 1 always off, nine examples each, so
  // p(on | 0) = 10/11, p(on | 1) = 1/11 and the priors are equal.
  std::vector<float> px;
  std::vector<int> y;
  for (int i = 0; i < 9; ++i) {
    px.push_back(1);
    y.push_back(0);
    px.push_back(0);
    y.push_back(1);
  }
  auto s = split_of(px, 1);
  attach_labels(s, y, 2);
  const auto m = naive_bayes_fit(s);
  const std::vector<float> on{1.0f};
  const auto post = m.posterior(on);
  EXPECT_NEAR(post[0], 10.0 / 11.0, 1e-12);
  EXPECT_EQ(m.predict(on), 0);
}

TEST(NaiveBayes, PosteriorMatchesDirectComputation) {
  const auto s = vaeprobe::testing::synthetic_binary(200, 12, 3, 8, 0.2);
  const auto m = naive_bayes_fit(s);
  double prior_sum = 0;
  for (double lp : m.log_prior) prior_sum += std::exp(lp);
  EXPECT_NEAR(prior_sum, 1.0, 1e-12);

  // Oracle: class counts and Laplace-smoothed frequencies computed here.
  std::vector<double> n(3, 0), ones(36, 0);
  for (std::size_t i = 0; i < s.rows; ++i) {
    const auto c = static_cast<std::size_t>((*s.labels)[i]);
    n[c] += 1;
    for (std::size_t j = 0; j < 12; ++j) ones[c * 12 + j] += s.images[i * 12 + j];
  }
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> x(12);
    for (auto& v : x) v = rng.below(2) ? 1.0f : 0.0f;
    std::vector<double> joint(3);
    for (std::size_t c = 0; c < 3; ++c) {
      double p = n[c] / 200.0;
      for (std::size_t j = 0; j < 12; ++j) {
        const double q = (ones[c * 12 + j] + 1) / (n[c] + 2);
        p *= x[j] > 0.5f ? q : 1 - q;
      }
      joint[c] = p;
    }
    const double z = joint[0] + joint[1] + joint[2];
    const auto post = m.posterior(x);
    double total = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(post[c], joint[c] / z, 1e-12);
      total += post[c];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(NaiveBayes, TransferChecksDimensionsAndLabels) {
  const auto s = vaeprobe::testing::synthetic_binary(100, 12, 3, 9);
  const auto m = naive_bayes_fit(s);
  const auto y = naive_bayes_transfer_labels(m, s);
  EXPECT_EQ(y.size(), 100u);
  for (int v : y) EXPECT_TRUE(v >= 0 && v < 3);
  EXPECT_GE(naive_bayes_accuracy(m, s), 0.95);
  const auto wrong = vaeprobe::testing::synthetic_binary(10, 9, 3, 9);
  EXPECT_THROW(naive_bayes_transfer_labels(m, wrong), ShapeError);
  EXPECT_THROW(naive_bayes_fit(split_of({1, 0}, 2)), DataError);
}

TEST(Mnist, SubsetLoadsAndNaiveBayesFits) {
  if (!vaeprobe::testing::mnist_available()) GTEST_SKIP() << "MNIST files not present";
  const auto dir = vaeprobe::testing::mnist_dir();
  const auto train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  EXPECT_EQ(train.cols, 784u);
  EXPECT_GE(train.rows, 8000u);
  const auto bin = binarize(train, BinarizeMode::thresholded());
  bin.validate(true);
  EXPECT_GE(naive_bayes_accuracy(naive_bayes_fit(bin), bin), 0.80);
}
