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

#include <benchmark/benchmark.h>

#include "vaeprobe/adam.hpp"
#include "vaeprobe/graph.hpp"
#include "vaeprobe/models.hpp"
#include "vaeprobe/objectives.hpp"
#include "vaeprobe/pca.hpp"

using namespace vaeprobe;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.span()) v = static_cast<float>(rng.gaussian());
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) {
    Graph<float> g;
    benchmark::DoNotOptimize(g.value(g.matmul(g.constant(a), g.constant(b))).ptr());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(128)->Arg(512);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const Tensor x = random_tensor({32, 1, 28, 28}, 3);
  TensorMap<float> p;
  p.insert("w", random_tensor({16, 1, 5, 5}, 4));
  p.insert("b", Tensor(Shape{16}));
  for (auto _ : state) {
    Graph<float> g;
    g.params(p);
    const Var y = g.conv2d(g.constant(x), g.param_var("w"), g.param_var("b"));
    benchmark::DoNotOptimize(g.backward(g.sum(y)));
  }
}
BENCHMARK(BM_Conv2dForwardBackward);

void BM_VaeTrainingStep(benchmark::State& state) {
  VaeSpec spec;
  auto params = init_params(spec, 0).tensors;
  Tensor x = random_tensor({128, 784}, 5);
  for (auto& v : x.span()) v = v > 0.0f ? 1.0f : 0.0f;
  AdamState<float> adam;
  Rng rng(6);
  for (auto _ : state) {
    Graph<float> g;
    g.params(params);
    const auto terms = beta_vae_loss(g, params, spec, x, 1.0, rng);
    const auto grads = g.backward(terms.loss);
    adam_step(adam, params, grads, 1e-3);
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_VaeTrainingStep)->Unit(benchmark::kMillisecond);

void BM_PcaFit(benchmark::State& state) {
  const Tensor x = random_tensor({2000, 100}, 7);
  const std::vector<double> data(x.values().begin(), x.values().end());
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(data, 2000, 100, 10));
}
BENCHMARK(BM_PcaFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
