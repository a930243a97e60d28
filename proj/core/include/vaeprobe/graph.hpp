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

#ifndef VAEPROBE_GRAPH_HPP
#define VAEPROBE_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vaeprobe/rng.hpp"
#include "vaeprobe/tensor.hpp"
#include "vaeprobe/tensor_map.hpp"

namespace vaeprobe {

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
  bool valid() const { return id != std::numeric_limits<std::uint32_t>::max(); }
};

/// Define-by-run reverse-mode tape.
///
/// Every primitive evaluates eagerly, checks its output for NaN/Inf and
/// appends one node. Nodes are therefore in topological order, and
/// backward() walks them in exact reverse order, so gradient accumulation
/// order (and hence every bit of the result) is fixed by the forward
/// program. A graph is single-threaded; build one per step.
template <class T>
class Graph {
 public:
  using TensorT = BasicTensor<T>;
  using BackwardFn = std::function<void(Graph&, Var out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  // Leaves
  Var constant(TensorT value);
  /// Trainable leaf. Registering the same name twice returns the first node.
  Var param(const std::string& name, const TensorT& value);
  /// Registers every entry of `params` (in order) so non-participating
  /// parameters still receive zero gradients.
  void params(const TensorMap<T>& params);
  Var param_var(const std::string& name) const;

  // Linear algebra
  Var matmul(Var a, Var b);               // [n,k] x [k,m] -> [n,m]
  Var affine(Var x, Var w, Var b);        // x[n,k] w[k,m] + b[m]
  Var conv2d(Var x, Var w, Var b);        // x[n,c,h,w] * w[o,c,k,k] + b[o], same padding, stride 1
  Var maxpool2x2(Var x);                  // [n,c,h,w] -> [n,c,h/2,w/2]

  // Elementwise
  Var elu(Var x);
  Var sigmoid(Var x);
  Var exp(Var x);
  Var log(Var x);
  Var softplus(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, T factor);
  Var add_scalar(Var x, T offset);
  /// Pass-through inside [lo, hi]; zero gradient where clamped.
  Var clamp(Var x, T lo, T hi);
  /// Inverted dropout: zeroes with probability `rate`, scales survivors by 1/(1-rate).
  Var dropout(Var x, double rate, Rng& rng);

  // Reductions and reshaping
  Var sum(Var x);                          // -> [1]
  Var mean(Var x);                         // -> [1]
  Var sum_rows(Var x);                     // [n,m] -> [n]
  Var logsumexp_rows(Var x);               // [n,m] -> [n]
  Var log_softmax(Var x);                  // along the last axis of [m] or [n,m]
  Var add_row_vector(Var x, Var v);        // [n,m] + [m]
  Var columns(Var x, std::size_t begin, std::size_t end);  // [n,m] -> [n,end-begin]
  Var reshape(Var x, Shape shape);

  // Losses and sampling
  /// Elementwise Bernoulli cross-entropy in nats, softplus(l) - t*l; targets in {0,1}.
  Var bernoulli_ce_from_logits(Var logits, const TensorT& targets);
  /// Per-row softmax cross-entropy in nats: [n,K] -> [n].
  Var softmax_ce_from_logits(Var logits, std::span<const int> labels);
  /// mean + exp(log_std) * eps; eps is recorded as a constant.
  Var reparam_sample(Var mean, Var log_std, const TensorT& eps);
  /// Per-row diagonal Gaussian log density: z[n,L] under N(mean[n,L], exp(log_std)^2) -> [n].
  Var gaussian_log_density(Var z, Var mean, Var log_std);
  /// z[n,L] against M components mean[M,L], log_std[M,L] -> [n,M].
  Var pairwise_gaussian_log_density(Var z, Var mean, Var log_std);

  /// Extension point: a node whose backward rule is supplied by the caller.
  Var custom(std::string op, std::vector<Var> inputs, TensorT value, BackwardFn backward);

  /// Runs the reverse pass from a scalar loss and returns the gradient of
  /// every registered parameter, in registration order.
  TensorMap<T> backward(Var loss);

  const TensorT& value(Var v) const { return node(v).value; }
  /// Adjoint after backward(); a zero tensor if nothing flowed into v.
  const TensorT& grad(Var v);
  void accumulate_grad(Var v, const TensorT& delta);
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  const std::string& op_name(Var v) const { return node(v).op; }
  std::size_t size() const { return nodes_.size(); }
  Var input(Var v, std::size_t i) const { return node(v).inputs.at(i); }

 private:
  struct Node {
    std::string op;
    std::vector<Var> inputs;
    TensorT value;
    TensorT grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  Var push(std::string op, std::vector<Var> inputs, TensorT value, BackwardFn backward);
  Node& node(Var v) { return nodes_.at(v.id); }
  const Node& node(Var v) const { return nodes_.at(v.id); }
  TensorT& grad_buffer(Var v);

  std::vector<Node> nodes_;
  std::vector<std::string> param_names_;
  std::unordered_map<std::string, Var> param_index_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace vaeprobe

#endif  // VAEPROBE_GRAPH_HPP
