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

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "vaeprobe/errors.hpp"
#include "vaeprobe/objectives.hpp"
#include "vaeprobe/probe.hpp"
#include "vaeprobe/training.hpp"

using namespace vaeprobe;

namespace {

DiagGaussian posterior(std::vector<float> mean, std::vector<float> log_std, std::size_t l) {
  const std::size_t n = mean.size() / l;
  return {Tensor(Shape{n, l}, std::move(mean)), Tensor(Shape{n, l}, std::move(log_std))};
}

DiagGaussian random_posterior(std::size_t n, std::size_t l, Rng& rng) {
  DiagGaussian p{Tensor(Shape{n, l}), Tensor(Shape{n, l})};
  for (auto& v : p.mean.span()) v = static_cast<float>(rng.gaussian());
  for (auto& v : p.log_std.span()) v = static_cast<float>(rng.uniform() * 1.5 - 1.0);
  return p;
}

VaeSpec small_vae(std::size_t in, std::size_t latent) {
  VaeSpec spec;
  spec.encoder.input_dim = in;
  spec.encoder.hidden = {16};
  spec.decoder.hidden = {16};
  spec.decoder.output_dim = in;
  spec.set_latent_dim(latent);
  return spec;
}

DatasetSplit copies_of(const std::vector<float>& image, std::size_t n) {
  DatasetSplit s;
  s.name = "copies";
  s.rows = n;
  s.cols = image.size();
  for (std::size_t i = 0; i < n; ++i) s.images.insert(s.images.end(), image.begin(), image.end());
  return s;
}

}  // namespace

TEST(Rate, ClosedFormExamples) {
  EXPECT_EQ(rate_closed_form(posterior({0, 0}, {0, 0}, 2)), 0.0);
  EXPECT_NEAR(rate_closed_form(posterior({1, 1}, {0, 0}, 2)), 1.0, 1e-12);
  EXPECT_NEAR(rate_closed_form(posterior({0}, {static_cast<float>(std::log(0.5))}, 1)), 0.318147, 1e-6);
}

TEST(Rate, NonNegativeAndZeroOnlyAtStandardNormal) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_posterior(3, 4, rng);
    EXPECT_GT(rate_closed_form(p), 0.0);
  }
  EXPECT_THROW(rate_closed_form(posterior({std::nanf("")}, {0}, 1)), NumericError);
}

TEST(Rate, GraphVersionAgreesWithPlainVersion) {
  Rng rng(2);
  const auto p = random_posterior(5, 3, rng);
  Graph<double> g;
  const Var kl = rate_closed_form(g, g.constant(p.mean.cast<double>()), g.constant(p.log_std.cast<double>()));
  double mean = 0;
  for (double v : g.value(kl).values()) mean += v / 5.0;
  EXPECT_NEAR(mean, rate_closed_form(p), 1e-9);
}

TEST(Rate, MonteCarloAgreesWithClosedForm) {
  MarginalSpec fixed;
  fixed.latent_dim = 4;
  Rng rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const auto p = random_posterior(1, 4, rng);
    const auto est = rate_monte_carlo(p, {}, fixed, 20000, rng);
    EXPECT_GT(est.standard_error, 0.0);
    EXPECT_LT(std::abs(est.mean - rate_closed_form(p)), 3.0 * est.standard_error);
  }
}

TEST(Rate, MonteCarloIsZeroWhenPosteriorEqualsMarginal) {
  MarginalSpec mix;
  mix.kind = MarginalSpec::Kind::learned_mixture;
  mix.latent_dim = 2;
  mix.components = 1;
  TensorMap<float> params;
  params.insert("marginal.means", Tensor(Shape{1, 2}));
  params.insert("marginal.log_stds", Tensor(Shape{1, 2}));
  params.insert("marginal.logits", Tensor(Shape{1}));
  Rng a(4), b(4);
  const auto p = posterior({0, 0}, {0, 0}, 2);
  const auto est = rate_monte_carlo(p, params, mix, 1000, a);
  EXPECT_NEAR(est.mean, 0.0, 1e-9);
  EXPECT_EQ(est.mean, rate_monte_carlo(p, params, mix, 1000, b).mean);
}

TEST(Distortion, ZeroLogitsCostLn2PerPixel) {
  Graph<double> g;
  TensorD x(Shape{1, 784});
  for (std::size_t i = 0; i < 784; i += 3) x[i] = 1.0;
  const double d = g.value(distortion(g, g.constant(TensorD(Shape{1, 784})), x))[0];
  EXPECT_NEAR(d, 784 * std::numbers::ln2, 1e-9);
  EXPECT_NEAR(d, 543.427, 1e-3);
}

TEST(Distortion, SaturatedLogitsCostNothing) {
  Graph<double> g;
  TensorD x(Shape{1, 10}), logits(Shape{1, 10}, -50.0);
  for (std::size_t i = 0; i < 10; i += 2) {
    x[i] = 1.0;
    logits[i] = 50.0;
  }
  const double d = g.value(distortion(g, g.constant(logits), x))[0];
  EXPECT_LT(d, 1e-6);
  EXPECT_GE(d, 0.0);
}

TEST(Loss, BetaZeroIsPureDistortion) {
  const VaeSpec spec = small_vae(10, 2);
  const auto params = init_params(spec, 1).tensors;
  const auto x = vaeprobe::testing::synthetic_binary(6, 10, 2, 1);
  Graph<float> g;
  g.params(params);
  Rng rng(5);
  const auto t = beta_vae_loss(g, params, spec, Tensor(Shape{6, 10}, x.images), 0.0, rng);
  EXPECT_EQ(g.value(t.loss)[0], g.value(t.distortion)[0]);
}

TEST(Loss, EqualsNegativeElboAtBetaOne) {
  const VaeSpec spec = small_vae(10, 2);
  const auto params = init_params(spec, 2).tensors.cast<double>();
  const auto data = vaeprobe::testing::synthetic_binary(5, 10, 2, 2);
  const TensorD x = Tensor(Shape{5, 10}, data.images).cast<double>();

  Rng rng(6);
  Rng replay = rng;
  Graph<double> g;
  g.params(params);
  const auto t = beta_vae_loss(g, params, spec, x, 1.0, rng);

  // Oracle: same posterior and the same noise, objective assembled by hand.
  Graph<double> h;
  const auto post = encode(h, params, spec.encoder, h.constant(x));
  const auto& mu = h.value(post.mean);
  const auto& ls = h.value(post.log_std);
  TensorD eps(mu.shape());
  replay.fill_gaussian(eps.span());
  TensorD z(mu.shape());
  double kl = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = mu[i] + std::exp(ls[i]) * eps[i];
    kl += -ls[i] + 0.5 * (std::exp(2 * ls[i]) + mu[i] * mu[i] - 1);
  }
  const auto& logits = h.value(decode(h, params, spec.decoder, h.constant(z)));
  double nll = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double l = logits[i];
    nll += std::max(l, 0.0) - l * x[i] + std::log1p(std::exp(-std::abs(l)));
  }
  EXPECT_NEAR(g.value(t.loss)[0], (nll + kl) / 5.0, 1e-9);
}

TEST(Loss, DecomposesForAnyBeta) {
  const VaeSpec spec = small_vae(10, 3);
  const auto params = init_params(spec, 3).tensors.cast<double>();
  const auto data = vaeprobe::testing::synthetic_binary(4, 10, 2, 3);
  const TensorD x = Tensor(Shape{4, 10}, data.images).cast<double>();
  for (double beta : {0.1, 1.0, 3.7, 50.0}) {
    Graph<double> g;
    g.params(params);
    Rng rng(7);
    const auto t = beta_vae_loss(g, params, spec, x, beta, rng);
    EXPECT_NEAR(g.value(t.loss)[0], g.value(t.distortion)[0] + beta * g.value(t.rate)[0], 1e-9);
  }
  Graph<double> g;
  Rng rng(7);
  EXPECT_THROW(beta_vae_loss(g, params, spec, x, -1.0, rng), Error);
}

TEST(Compression, FactorAndUnits) {
  EXPECT_NEAR(compression_factor(20.0, kMnistEntropyNats), 3.989, 1e-12);
  EXPECT_EQ(compression_factor(79.78, kMnistEntropyNats), 1.0);
  EXPECT_GT(compression_factor(8.86, kMnistEntropyNats), 9.0);
  EXPECT_THROW(compression_factor(0.0, kMnistEntropyNats), Error);
  EXPECT_NEAR(nats_to_bits(0.05), 0.0721, 1e-4);
  EXPECT_NEAR(EntropyConstants::omniglot_alphabets(1.0).h_y, 3.912023, 1e-6);
  EXPECT_NEAR(EntropyConstants::omniglot_characters(1.0).h_y, 7.392032, 1e-6);
}

TEST(TrainVae, ZeroEpochsReportsInitialization) {
  const VaeSpec spec = small_vae(10, 2);
  const auto data = vaeprobe::testing::synthetic_binary(20, 10, 2, 4);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto r = train_vae(spec, cfg, data, data);
  EXPECT_EQ(r.status, RunStatus::completed);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].epoch, 0u);
  EXPECT_EQ(r.params.tensors, init_params(spec, cfg.seed).tensors);
}

TEST(TrainVae, OverfitsEightCopiesOfOneImage) {
  VaeSpec spec;
  spec.set_latent_dim(2);
  const auto image = vaeprobe::testing::synthetic_binary(1, 784, 4, 5, 0.3).images;
  const auto data = copies_of(image, 8);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch = 8;
  const auto r = train_vae(spec, cfg, data, data);
  ASSERT_EQ(r.status, RunStatus::completed) << r.diagnostic;
  ASSERT_EQ(r.history.size(), 201u);
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
  EXPECT_LT(r.history.back().distortion_nats, 0.5 * r.history.front().distortion_nats);
}

TEST(TrainVae, SameSeedSameHistory) {
  const VaeSpec spec = small_vae(10, 2);
  const auto data = vaeprobe::testing::synthetic_binary(40, 10, 2, 6);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch = 16;
  const auto a = train_vae(spec, cfg, data, data);
  const auto b = train_vae(spec, cfg, data, data);
  ASSERT_EQ(a.history.size(), 4u);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
    EXPECT_EQ(a.history[i].rate_nats, b.history[i].rate_nats);
  }
  EXPECT_EQ(a.params.tensors, b.params.tensors);
  cfg.seed = 1;
  EXPECT_NE(train_vae(spec, cfg, data, data).params.tensors, a.params.tensors);
}

TEST(TrainVae, OverflowingLearningRateAbortsCleanly) {
  const VaeSpec spec = small_vae(16, 2);
  const auto data = vaeprobe::testing::synthetic_binary(64, 16, 4, 7, 0.3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch = 16;
  cfg.lr = 1e30;
  const auto r = train_vae(spec, cfg, data, data);
  EXPECT_EQ(r.status, RunStatus::aborted_nan);
  EXPECT_NE(r.diagnostic.find("epoch 1"), std::string::npos) << r.diagnostic;
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.history[0].loss));
}

TEST(TrainVae, LearningRate1e3DivergesWithoutOverflow) {
  // Adam moves each weight by at most about lr per step, so the run
  // blows up linearly and float never overflows.
  VaeSpec spec;
  const auto data = vaeprobe::testing::synthetic_binary(64, 784, 4, 7, 0.3);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch = 16;
  cfg.lr = 1e3;
  const auto r = train_vae(spec, cfg, data, data);
  EXPECT_EQ(r.status, RunStatus::completed);
  EXPECT_GT(r.history.back().rate_nats, 1e20);
  for (const auto& m : r.history) EXPECT_TRUE(std::isfinite(m.loss));
}

TEST(TrainVae, MixtureMarginalTrains) {
  VaeSpec spec = small_vae(10, 2);
  spec.marginal.kind = MarginalSpec::Kind::learned_mixture;
  spec.marginal.components = 4;
  const auto data = vaeprobe::testing::synthetic_binary(40, 10, 2, 8);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 10;
  const auto r = train_vae(spec, cfg, data, data);
  EXPECT_EQ(r.status, RunStatus::completed) << r.diagnostic;
  EXPECT_TRUE(r.params.tensors.contains("marginal.means"));
}

TEST(Probe, StaircaseIsExact) {
  const ProbeConfig cfg;
  EXPECT_EQ(probe_learning_rate(cfg, 0), 1e-4);
  EXPECT_EQ(probe_learning_rate(cfg, 24), 1e-4);
  EXPECT_EQ(probe_learning_rate(cfg, 25), 1e-5);
  EXPECT_EQ(probe_learning_rate(cfg, 50), 1e-6);
  EXPECT_EQ(probe_learning_rate(cfg, 75), 1e-7);
}

TEST(Probe, UntrainedProbeScoresLogK) {
  Rng rng(9);
  Tensor codes(Shape{50, 4});
  for (auto& v : codes.span()) v = static_cast<float>(rng.gaussian());
  std::vector<int> y(50);
  for (auto& v : y) v = static_cast<int>(rng.below(10));
  const ClassifierSpec spec = probe_spec(4, 10);
  const auto params = init_params(spec, 0).tensors;
  Tensor sd(Shape{50, 4}, 0.5f);
  const auto c = evaluate_classifier(params, spec, GaussianEncoding::gaussian(codes, sd), y, 16, rng);
  EXPECT_NEAR(c.c_nats, std::log(10.0), 1e-12);
  EXPECT_NEAR(c.c_nats, 2.302585, 1e-6);
}

TEST(Probe, SeparableCodesReachLowLabelDistortion) {
  Rng rng(10);
  const std::size_t n = 200;
  Tensor train(Shape{n, 1}), test(Shape{n, 1});
  std::vector<int> ytrain(n), ytest(n);
  for (std::size_t i = 0; i < n; ++i) {
    ytrain[i] = static_cast<int>(i % 2);
    ytest[i] = static_cast<int>((i + 1) % 2);
    train[i] = static_cast<float>((ytrain[i] ? 1 : -1) * (1.0 + rng.uniform()));
    test[i] = static_cast<float>((ytest[i] ? 1 : -1) * (1.0 + rng.uniform()));
  }
  ProbeConfig cfg;
  cfg.epochs = 30;
  cfg.lr = 1e-2;
  cfg.decay_every = 1000;
  const auto r = probe_label_distortion(GaussianEncoding::deterministic(train), ytrain,
                                        GaussianEncoding::deterministic(test), ytest, 2, cfg);
  EXPECT_LT(r.label_distortion_nats, 0.05);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.samples, 1u);
  ASSERT_EQ(r.history.size(), 31u);
  EXPECT_NEAR(r.history[0].test_c, std::log(2.0), 1e-12);
  ASSERT_TRUE(r.history[0].train_c && r.history[1].train_c);
  EXPECT_LE(*r.history[1].train_c, *r.history[0].train_c);
}

TEST(Probe, DeterministicAndValidated) {
  Rng rng(11);
  Tensor codes(Shape{40, 3});
  for (auto& v : codes.span()) v = static_cast<float>(rng.gaussian());
  std::vector<int> y(40);
  for (auto& v : y) v = static_cast<int>(rng.below(3));
  const auto src = GaussianEncoding::gaussian(codes, Tensor(Shape{40, 3}, 0.3f));
  ProbeConfig cfg;
  cfg.epochs = 2;
  const auto a = probe_label_distortion(src, y, src, y, 3, cfg);
  const auto b = probe_label_distortion(src, y, src, y, 3, cfg);
  EXPECT_EQ(a.label_distortion_nats, b.label_distortion_nats);
  EXPECT_EQ(a.samples, 16u);
  const std::vector<int> short_labels(10, 0);
  EXPECT_THROW(probe_label_distortion(src, short_labels, src, y, 3, cfg), Error);
  EXPECT_THROW(GaussianEncoding::gaussian(codes, Tensor(Shape{40, 3}, 0.0f)), Error);
}
