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

#include <functional>
#include <map>

#include "vaeprobe/errors.hpp"
#include "vaeprobe/gradcheck.hpp"
#include "vaeprobe/rng.hpp"

namespace vaeprobe {

namespace {

struct Case {
  TensorMap<double> params;
  LossBuilder build;
};

using CaseFactory = std::function<Case(Rng&)>;

TensorD uniform(Rng& rng, Shape shape, double lo = -2.0, double hi = 2.0) {
  TensorD t(std::move(shape));
  for (double& v : t.span()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

// Scalar sum(out * W) with W drawn from a fixed stream, so repeated builds agree.
Var project(Graph<double>& g, Var out, std::uint64_t seed) {
  Rng rng(seed);
  TensorD w(g.value(out).shape());
  rng.fill_gaussian(w.span());
  return g.sum(g.mul(out, g.constant(std::move(w))));
}

template <class Body>
Case unary(Rng& rng, Shape shape, Body body, double lo = -2.0, double hi = 2.0) {
  TensorMap<double> p;
  p.insert("x", uniform(rng, std::move(shape), lo, hi));
  const std::uint64_t ws = rng.next_u64();
  return {std::move(p), [=](Graph<double>& g, const TensorMap<double>& m) {
            return project(g, body(g, g.param("x", m.at("x"))), ws);
          }};
}

template <class Body>
Case binary(Rng& rng, Shape a, Shape b, Body body) {
  TensorMap<double> p;
  p.insert("a", uniform(rng, std::move(a)));
  p.insert("b", uniform(rng, std::move(b)));
  const std::uint64_t ws = rng.next_u64();
  return {std::move(p), [=](Graph<double>& g, const TensorMap<double>& m) {
            return project(g, body(g, g.param("a", m.at("a")), g.param("b", m.at("b"))), ws);
          }};
}

const std::map<std::string, CaseFactory>& factories() {
  static const std::map<std::string, CaseFactory> table = {
      {"matmul", [](Rng& r) { return binary(r, {3, 4}, {4, 5}, [](auto& g, Var a, Var b) { return g.matmul(a, b); }); }},
      {"affine",
       [](Rng& r) {
         TensorMap<double> p;
         p.insert("x", uniform(r, {3, 4}));
         p.insert("w", uniform(r, {4, 5}));
         p.insert("b", uniform(r, {5}));
         const auto ws = r.next_u64();
         return Case{std::move(p), [=](Graph<double>& g, const TensorMap<double>& m) {
                       return project(g, g.affine(g.param("x", m.at("x")), g.param("w", m.at("w")), g.param("b", m.at("b"))), ws);
                     }};
       }},
      {"conv2d",
       [](Rng& r) {
         TensorMap<double> p;
         p.insert("x", uniform(r, {2, 2, 5, 5}));
         p.insert("w", uniform(r, {3, 2, 3, 3}));
         p.insert("b", uniform(r, {3}));
         const auto ws = r.next_u64();
         return Case{std::move(p), [=](Graph<double>& g, const TensorMap<double>& m) {
                       return project(g, g.conv2d(g.param("x", m.at("x")), g.param("w", m.at("w")), g.param("b", m.at("b"))), ws);
                     }};
       }},
      {"maxpool2x2", [](Rng& r) { return unary(r, {2, 2, 4, 6}, [](auto& g, Var x) { return g.maxpool2x2(x); }); }},
      {"elu", [](Rng& r) { return unary(r, {4, 5}, [](auto& g, Var x) { return g.elu(x); }); }},
      {"sigmoid", [](Rng& r) { return unary(r, {4, 5}, [](auto& g, Var x) { return g.sigmoid(x); }); }},
      {"exp", [](Rng& r) { return unary(r, {4, 5}, [](auto& g, Var x) { return g.exp(x); }); }},
      {"log", [](Rng& r) { return unary(r, {4, 5}, [](auto& g, Var x) { return g.log(x); }, 0.25, 2.0); }},
      {"softplus", [](Rng& r) { return unary(r, {4, 5}, [](auto& g, Var x) { return g.softplus(x); }); }},
      {"add", [](Rng& r) { return binary(r, {3, 4}, {3, 4}, [](auto& g, Var a, Var b) { return g.add(a, b); }); }},
      {"sub", [](Rng& r) { return binary(r, {3, 4}, {3, 4}, [](auto& g, Var a, Var b) { return g.sub(a, b); }); }},
      {"mul", [](Rng& r) { return binary(r, {3, 4}, {3, 4}, [](auto& g, Var a, Var b) { return g.mul(a, b); }); }},
      {"scale", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.scale(x, -1.7); }); }},
      {"add_scalar", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.add_scalar(x, 0.3); }); }},
      {"clamp", [](Rng& r) { return unary(r, {4, 5}, [](auto& g, Var x) { return g.clamp(x, -1.0, 1.0); }); }},
      {"dropout",
       [](Rng& r) {
         const auto ms = r.next_u64();
         return unary(r, {4, 5}, [ms](auto& g, Var x) {
           Rng mask(ms);
           return g.dropout(x, 0.3, mask);
         });
       }},
      {"sum", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.sum(x); }); }},
      {"mean", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.mean(x); }); }},
      {"sum_rows", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.sum_rows(x); }); }},
      {"logsumexp_rows", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.logsumexp_rows(x); }); }},
      {"log_softmax", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.log_softmax(x); }); }},
      {"add_row_vector", [](Rng& r) { return binary(r, {3, 4}, {4}, [](auto& g, Var a, Var b) { return g.add_row_vector(a, b); }); }},
      {"columns", [](Rng& r) { return unary(r, {3, 6}, [](auto& g, Var x) { return g.columns(x, 1, 4); }); }},
      {"reshape", [](Rng& r) { return unary(r, {3, 4}, [](auto& g, Var x) { return g.reshape(x, Shape{2, 6}); }); }},
      {"bernoulli_ce_from_logits",
       [](Rng& r) {
         TensorD t(Shape{4, 5});
         for (double& v : t.span()) v = r.uniform() < 0.5 ? 0.0 : 1.0;
         return unary(r, {4, 5}, [t](auto& g, Var x) { return g.bernoulli_ce_from_logits(x, t); });
       }},
      {"softmax_ce_from_logits",
       [](Rng& r) {
         std::vector<int> y(4);
         for (int& v : y) v = static_cast<int>(r.below(5));
         return unary(r, {4, 5}, [y](auto& g, Var x) { return g.softmax_ce_from_logits(x, y); });
       }},
      {"reparam_sample",
       [](Rng& r) {
         TensorD eps(Shape{3, 4});
         r.fill_gaussian(eps.span());
         return binary(r, {3, 4}, {3, 4}, [eps](auto& g, Var a, Var b) { return g.reparam_sample(a, b, eps); });
       }},
      {"gaussian_log_density",
       [](Rng& r) {
         TensorMap<double> p;
         p.insert("z", uniform(r, {3, 4}));
         p.insert("m", uniform(r, {3, 4}));
         p.insert("s", uniform(r, {3, 4}, -1.0, 1.0));
         const auto ws = r.next_u64();
         return Case{std::move(p), [=](Graph<double>& g, const TensorMap<double>& m) {
                       return project(g, g.gaussian_log_density(g.param("z", m.at("z")), g.param("m", m.at("m")), g.param("s", m.at("s"))), ws);
                     }};
       }},
      {"pairwise_gaussian_log_density",
       [](Rng& r) {
         TensorMap<double> p;
         p.insert("z", uniform(r, {3, 4}));
         p.insert("m", uniform(r, {5, 4}));
         p.insert("s", uniform(r, {5, 4}, -1.0, 1.0));
         const auto ws = r.next_u64();
         return Case{std::move(p), [=](Graph<double>& g, const TensorMap<double>& m) {
                       return project(g, g.pairwise_gaussian_log_density(g.param("z", m.at("z")), g.param("m", m.at("m")), g.param("s", m.at("s"))), ws);
                     }};
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> differentiable_primitives() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : factories()) names.push_back(name);
  return names;
}

PrimitiveCheck check_primitive(const std::string& primitive, std::size_t cases, std::uint64_t seed,
                               const GradCheckOptions& options) {
  const auto it = factories().find(primitive);
  if (it == factories().end()) throw ConfigError("unknown primitive '" + primitive + "'");
  PrimitiveCheck out;
  out.primitive = primitive;
  out.cases = cases;
  Rng root = Rng(seed).derive(primitive);
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng = root.derive(static_cast<std::uint64_t>(c));
    const Case kase = it->second(rng);
    const auto report = finite_difference_check(kase.build, kase.params, options);
    out.max_rel_error = std::max(out.max_rel_error, report.max_rel_error);
    out.passed = out.passed && report.passed;
  }
  return out;
}

std::vector<PrimitiveCheck> check_primitives(std::size_t cases, std::uint64_t seed,
                                             const GradCheckOptions& options) {
  std::vector<PrimitiveCheck> out;
  for (const auto& name : differentiable_primitives()) {
    out.push_back(check_primitive(name, cases, seed, options));
  }
  return out;
}

}  // namespace vaeprobe
