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

#include "vaeprobe/graph.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "vaeprobe/errors.hpp"

namespace vaeprobe {

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<Mat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const Mat<T>>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <class T>
MatMap<T> as_mat(BasicTensor<T>& t, std::size_t rows, std::size_t cols) {
  return MatMap<T>(t.ptr(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <class T>
ConstMatMap<T> as_mat(const BasicTensor<T>& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap<T>(t.ptr(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require(bool ok, const std::string& op, const std::string& what) {
  if (!ok) throw ShapeError(op + ": " + what);
}

std::string shapes(const Shape& a, const Shape& b) {
  return shape_string(a) + " vs " + shape_string(b);
}

template <class T>
T stable_sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
T stable_softplus(T x) {
  return std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <class T>
constexpr T half_log_two_pi = T(0.5) * T(1.8378770664093454835606594728112353);

// Copies the k x k receptive fields of one [c,h,w] image into a
// [c*k*k, h*w] matrix (zero padding, stride 1).
template <class T>
void im2col(const T* img, std::size_t c, std::size_t h, std::size_t w, std::size_t k, T* cols) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t hw = h * w;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* dst = cols + ((ch * k + ky) * k + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const auto sy = static_cast<std::ptrdiff_t>(y + ky) - pad;
          for (std::size_t x = 0; x < w; ++x) {
            const auto sx = static_cast<std::ptrdiff_t>(x + kx) - pad;
            const bool inside = sy >= 0 && sy < static_cast<std::ptrdiff_t>(h) && sx >= 0 &&
                                sx < static_cast<std::ptrdiff_t>(w);
            dst[y * w + x] = inside ? img[(ch * h + static_cast<std::size_t>(sy)) * w +
                                          static_cast<std::size_t>(sx)]
                                    : T(0);
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* cols, std::size_t c, std::size_t h, std::size_t w, std::size_t k, T* img) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t hw = h * w;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* src = cols + ((ch * k + ky) * k + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const auto sy = static_cast<std::ptrdiff_t>(y + ky) - pad;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t x = 0; x < w; ++x) {
            const auto sx = static_cast<std::ptrdiff_t>(x + kx) - pad;
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
            img[(ch * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx)] +=
                src[y * w + x];
          }
        }
      }
    }
  }
}

}  // namespace

template <class T>
Var Graph<T>::push(std::string op, std::vector<Var> inputs, TensorT value, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError(op + ": non-finite output");
  Node n;
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                [this](Var v) { return node(v).requires_grad; });
  n.op = std::move(op);
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <class T>
typename Graph<T>::TensorT& Graph<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = TensorT(n.value.shape());
  return n.grad;
}

template <class T>
const typename Graph<T>::TensorT& Graph<T>::grad(Var v) {
  return grad_buffer(v);
}

template <class T>
void Graph<T>::accumulate_grad(Var v, const TensorT& delta) {
  if (!node(v).requires_grad) return;
  TensorT& g = grad_buffer(v);
  require(g.shape() == delta.shape(), "accumulate_grad", shapes(g.shape(), delta.shape()));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

template <class T>
Var Graph<T>::constant(TensorT value) {
  if (!value.all_finite()) throw NumericError("constant: non-finite input");
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <class T>
Var Graph<T>::param(const std::string& name, const TensorT& value) {
  if (auto it = param_index_.find(name); it != param_index_.end()) return it->second;
  if (!value.all_finite()) throw NumericError("param '" + name + "': non-finite value");
  Node n;
  n.op = "param:" + name;
  n.value = value;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  Var v{static_cast<std::uint32_t>(nodes_.size() - 1)};
  param_index_.emplace(name, v);
  param_names_.push_back(name);
  return v;
}

template <class T>
void Graph<T>::params(const TensorMap<T>& params) {
  for (const auto& [name, value] : params) param(name, value);
}

template <class T>
Var Graph<T>::param_var(const std::string& name) const {
  auto it = param_index_.find(name);
  if (it == param_index_.end()) throw Error("graph has no parameter '" + name + "'");
  return it->second;
}

// ---------------------------------------------------------------- linear

template <class T>
Var Graph<T>::matmul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(0), "matmul",
          shapes(A.shape(), B.shape()));
  const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(1);
  TensorT out(Shape{n, m});
  as_mat(out, n, m).noalias() = as_mat(A, n, k) * as_mat(B, k, m);
  return push("matmul", {a, b}, std::move(out), [n, k, m](Graph& g, Var o) {
    Var a = g.input(o, 0), b = g.input(o, 1);
    auto dO = as_mat(g.node(o).grad, n, m);
    if (g.requires_grad(a)) {
      as_mat(g.grad_buffer(a), n, k).noalias() += dO * as_mat(g.value(b), k, m).transpose();
    }
    if (g.requires_grad(b)) {
      as_mat(g.grad_buffer(b), k, m).noalias() += as_mat(g.value(a), n, k).transpose() * dO;
    }
  });
}

template <class T>
Var Graph<T>::affine(Var x, Var w, Var b) {
  const auto& X = value(x);
  const auto& W = value(w);
  const auto& B = value(b);
  require(X.rank() == 2 && W.rank() == 2 && X.dim(1) == W.dim(0), "affine",
          shapes(X.shape(), W.shape()));
  require(B.rank() == 1 && B.dim(0) == W.dim(1), "affine bias", shapes(B.shape(), W.shape()));
  const std::size_t n = X.dim(0), k = X.dim(1), m = W.dim(1);
  TensorT out(Shape{n, m});
  auto O = as_mat(out, n, m);
  O.noalias() = as_mat(X, n, k) * as_mat(W, k, m);
  O.rowwise() += as_mat(B, 1, m).row(0);
  return push("affine", {x, w, b}, std::move(out), [n, k, m](Graph& g, Var o) {
    Var x = g.input(o, 0), w = g.input(o, 1), b = g.input(o, 2);
    auto dO = as_mat(g.node(o).grad, n, m);
    if (g.requires_grad(x)) {
      as_mat(g.grad_buffer(x), n, k).noalias() += dO * as_mat(g.value(w), k, m).transpose();
    }
    if (g.requires_grad(w)) {
      as_mat(g.grad_buffer(w), k, m).noalias() += as_mat(g.value(x), n, k).transpose() * dO;
    }
    if (g.requires_grad(b)) {
      // Plain loops: Eigen's vectorized reductions pick their summation
      // order from the runtime pointer alignment.
      T* db = g.grad_buffer(b).ptr();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) db[j] += dO(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  });
}

template <class T>
Var Graph<T>::conv2d(Var x, Var w, Var b) {
  const auto& X = value(x);
  const auto& W = value(w);
  const auto& B = value(b);
  require(X.rank() == 4 && W.rank() == 4, "conv2d", shapes(X.shape(), W.shape()));
  require(W.dim(1) == X.dim(1), "conv2d channels", shapes(X.shape(), W.shape()));
  require(W.dim(2) == W.dim(3) && W.dim(2) % 2 == 1, "conv2d",
          "kernel must be square and odd, got " + shape_string(W.shape()));
  require(B.rank() == 1 && B.dim(0) == W.dim(0), "conv2d bias", shapes(B.shape(), W.shape()));
  const std::size_t n = X.dim(0), c = X.dim(1), h = X.dim(2), wd = X.dim(3);
  const std::size_t o = W.dim(0), k = W.dim(2), hw = h * wd, ckk = c * k * k;

  TensorT out(Shape{n, o, h, wd});
  std::vector<T> cols(ckk * hw);
  const auto Wm = as_mat(W, o, ckk);
  const auto bias = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(B.ptr(), o);
  for (std::size_t i = 0; i < n; ++i) {
    im2col(X.ptr() + i * c * hw, c, h, wd, k, cols.data());
    MatMap<T> Oi(out.ptr() + i * o * hw, o, hw);
    Oi.noalias() = Wm * ConstMatMap<T>(cols.data(), ckk, hw);
    Oi.colwise() += bias;
  }
  return push("conv2d", {x, w, b}, std::move(out), [n, c, h, wd, o, k, hw, ckk](Graph& g, Var out) {
    Var x = g.input(out, 0), w = g.input(out, 1), b = g.input(out, 2);
    const auto& dO = g.node(out).grad;
    const auto& Xv = g.value(x);
    const auto Wm = as_mat(g.value(w), o, ckk);
    std::vector<T> cols(ckk * hw);
    std::vector<T> dcols(g.requires_grad(x) ? ckk * hw : 0);
    for (std::size_t i = 0; i < n; ++i) {
      ConstMatMap<T> dOi(dO.ptr() + i * o * hw, o, hw);
      if (g.requires_grad(w)) {
        im2col(Xv.ptr() + i * c * hw, c, h, wd, k, cols.data());
        as_mat(g.grad_buffer(w), o, ckk).noalias() +=
            dOi * ConstMatMap<T>(cols.data(), ckk, hw).transpose();
      }
      if (g.requires_grad(b)) {
        T* db = g.grad_buffer(b).ptr();
        const T* rows = dO.ptr() + i * o * hw;
        for (std::size_t r = 0; r < o; ++r) {
          T acc = T(0);
          for (std::size_t p = 0; p < hw; ++p) acc += rows[r * hw + p];
          db[r] += acc;
        }
      }
      if (g.requires_grad(x)) {
        MatMap<T>(dcols.data(), ckk, hw).noalias() = Wm.transpose() * dOi;
        col2im_add(dcols.data(), c, h, wd, k, g.grad_buffer(x).ptr() + i * c * hw);
      }
    }
  });
}

template <class T>
Var Graph<T>::maxpool2x2(Var x) {
  const auto& X = value(x);
  require(X.rank() == 4, "maxpool2x2", "expected [n,c,h,w], got " + shape_string(X.shape()));
  require(X.dim(2) % 2 == 0 && X.dim(3) % 2 == 0, "maxpool2x2",
          "spatial dims must be even, got " + shape_string(X.shape()));
  const std::size_t nc = X.dim(0) * X.dim(1), h = X.dim(2), w = X.dim(3);
  const std::size_t oh = h / 2, ow = w / 2;
  TensorT out(Shape{X.dim(0), X.dim(1), oh, ow});
  auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.size());
  for (std::size_t p = 0; p < nc; ++p) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        std::size_t best = (p * h + 2 * y) * w + 2 * xx;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (p * h + 2 * y + dy) * w + 2 * xx + dx;
            if (X[idx] > X[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + y) * ow + xx;
        out[o] = X[best];
        (*argmax)[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return push("maxpool2x2", {x}, std::move(out), [argmax](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[(*argmax)[i]] += dO[i];
  });
}

// ----------------------------------------------------------- elementwise

template <class T>
Var Graph<T>::elu(Var x) {
  TensorT out = value(x);
  for (auto& v : out.span()) v = v > 0 ? v : std::expm1(v);
  return push("elu", {x}, std::move(out), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& X = g.value(x);
    const auto& Y = g.value(o);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] * (X[i] > 0 ? T(1) : Y[i] + T(1));
  });
}

template <class T>
Var Graph<T>::sigmoid(Var x) {
  TensorT out = value(x);
  for (auto& v : out.span()) v = stable_sigmoid(v);
  return push("sigmoid", {x}, std::move(out), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& Y = g.value(o);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] * Y[i] * (T(1) - Y[i]);
  });
}

template <class T>
Var Graph<T>::exp(Var x) {
  TensorT out = value(x);
  for (auto& v : out.span()) v = std::exp(v);
  return push("exp", {x}, std::move(out), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& Y = g.value(o);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] * Y[i];
  });
}

template <class T>
Var Graph<T>::log(Var x) {
  TensorT out = value(x);
  for (auto& v : out.span()) v = std::log(v);
  return push("log", {x}, std::move(out), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& X = g.value(x);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] / X[i];
  });
}

template <class T>
Var Graph<T>::softplus(Var x) {
  TensorT out = value(x);
  for (auto& v : out.span()) v = stable_softplus(v);
  return push("softplus", {x}, std::move(out), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& X = g.value(x);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] * stable_sigmoid(X[i]);
  });
}

template <class T>
Var Graph<T>::add(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.shape() == B.shape(), "add", shapes(A.shape(), B.shape()));
  TensorT out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return push("add", {a, b}, std::move(out), [](Graph& g, Var o) {
    const auto& dO = g.node(o).grad;
    g.accumulate_grad(g.input(o, 0), dO);
    g.accumulate_grad(g.input(o, 1), dO);
  });
}

template <class T>
Var Graph<T>::sub(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.shape() == B.shape(), "sub", shapes(A.shape(), B.shape()));
  TensorT out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return push("sub", {a, b}, std::move(out), [](Graph& g, Var o) {
    const auto& dO = g.node(o).grad;
    g.accumulate_grad(g.input(o, 0), dO);
    Var b = g.input(o, 1);
    if (!g.requires_grad(b)) return;
    auto& dB = g.grad_buffer(b);
    for (std::size_t i = 0; i < dO.size(); ++i) dB[i] -= dO[i];
  });
}

template <class T>
Var Graph<T>::mul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  require(A.shape() == B.shape(), "mul", shapes(A.shape(), B.shape()));
  TensorT out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return push("mul", {a, b}, std::move(out), [](Graph& g, Var o) {
    Var a = g.input(o, 0), b = g.input(o, 1);
    const auto& dO = g.node(o).grad;
    if (g.requires_grad(a)) {
      const auto& B = g.value(b);
      auto& dA = g.grad_buffer(a);
      for (std::size_t i = 0; i < dO.size(); ++i) dA[i] += dO[i] * B[i];
    }
    if (g.requires_grad(b)) {
      const auto& A = g.value(a);
      auto& dB = g.grad_buffer(b);
      for (std::size_t i = 0; i < dO.size(); ++i) dB[i] += dO[i] * A[i];
    }
  });
}

template <class T>
Var Graph<T>::scale(Var x, T factor) {
  TensorT out = value(x);
  for (auto& v : out.span()) v *= factor;
  return push("scale", {x}, std::move(out), [factor](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] * factor;
  });
}

template <class T>
Var Graph<T>::add_scalar(Var x, T offset) {
  TensorT out = value(x);
  for (auto& v : out.span()) v += offset;
  return push("add_scalar", {x}, std::move(out), [](Graph& g, Var o) {
    g.accumulate_grad(g.input(o, 0), g.node(o).grad);
  });
}

template <class T>
Var Graph<T>::clamp(Var x, T lo, T hi) {
  TensorT out = value(x);
  for (auto& v : out.span()) v = std::clamp(v, lo, hi);
  return push("clamp", {x}, std::move(out), [lo, hi](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& X = g.value(x);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) {
      if (X[i] >= lo && X[i] <= hi) dX[i] += dO[i];
    }
  });
}

template <class T>
Var Graph<T>::dropout(Var x, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error("dropout rate must be in [0, 1)");
  const auto& X = value(x);
  auto mask = std::make_shared<TensorT>(X.shape());
  const T keep_scale = T(1.0 / (1.0 - rate));
  for (auto& m : mask->span()) m = rng.uniform() >= rate ? keep_scale : T(0);
  TensorT out = X;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
  return push("dropout", {x}, std::move(out), [mask](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i] * (*mask)[i];
  });
}

// ------------------------------------------------------------ reductions

template <class T>
Var Graph<T>::sum(Var x) {
  T total = 0;
  for (T v : value(x).span()) total += v;
  return push("sum", {x}, TensorT::scalar(total), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const T d = g.node(o).grad[0];
    for (auto& v : g.grad_buffer(x).span()) v += d;
  });
}

template <class T>
Var Graph<T>::mean(Var x) {
  const auto& X = value(x);
  T total = 0;
  for (T v : X.span()) total += v;
  const T inv = T(1) / static_cast<T>(X.size());
  return push("mean", {x}, TensorT::scalar(total * inv), [inv](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const T d = g.node(o).grad[0] * inv;
    for (auto& v : g.grad_buffer(x).span()) v += d;
  });
}

template <class T>
Var Graph<T>::sum_rows(Var x) {
  const auto& X = value(x);
  require(X.rank() == 2, "sum_rows", "expected rank 2, got " + shape_string(X.shape()));
  const std::size_t n = X.dim(0), m = X.dim(1);
  TensorT out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    T s = 0;
    for (std::size_t j = 0; j < m; ++j) s += X[i * m + j];
    out[i] = s;
  }
  return push("sum_rows", {x}, std::move(out), [n, m](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) dX[i * m + j] += dO[i];
    }
  });
}

template <class T>
Var Graph<T>::logsumexp_rows(Var x) {
  const auto& X = value(x);
  require(X.rank() == 2, "logsumexp_rows", "expected rank 2, got " + shape_string(X.shape()));
  const std::size_t n = X.dim(0), m = X.dim(1);
  TensorT out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    auto row = X.row(i);
    const T mx = *std::max_element(row.begin(), row.end());
    T s = 0;
    for (T v : row) s += std::exp(v - mx);
    out[i] = mx + std::log(s);
  }
  return push("logsumexp_rows", {x}, std::move(out), [n, m](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& X = g.value(x);
    const auto& Y = g.value(o);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) dX[i * m + j] += dO[i] * std::exp(X[i * m + j] - Y[i]);
    }
  });
}

template <class T>
Var Graph<T>::log_softmax(Var x) {
  const auto& X = value(x);
  require(X.rank() == 1 || X.rank() == 2, "log_softmax",
          "expected rank 1 or 2, got " + shape_string(X.shape()));
  const std::size_t n = X.rank() == 1 ? 1 : X.dim(0);
  const std::size_t m = X.size() / n;
  TensorT out = X;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.span().subspan(i * m, m);
    const T mx = *std::max_element(row.begin(), row.end());
    T s = 0;
    for (T v : row) s += std::exp(v - mx);
    const T lse = mx + std::log(s);
    for (auto& v : row) v -= lse;
  }
  return push("log_softmax", {x}, std::move(out), [n, m](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& Y = g.value(o);
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i) {
      T total = 0;
      for (std::size_t j = 0; j < m; ++j) total += dO[i * m + j];
      for (std::size_t j = 0; j < m; ++j) {
        dX[i * m + j] += dO[i * m + j] - std::exp(Y[i * m + j]) * total;
      }
    }
  });
}

template <class T>
Var Graph<T>::add_row_vector(Var x, Var v) {
  const auto& X = value(x);
  const auto& V = value(v);
  require(X.rank() == 2 && V.rank() == 1 && X.dim(1) == V.dim(0), "add_row_vector",
          shapes(X.shape(), V.shape()));
  const std::size_t n = X.dim(0), m = X.dim(1);
  TensorT out = X;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += V[j];
  }
  return push("add_row_vector", {x, v}, std::move(out), [n, m](Graph& g, Var o) {
    const auto& dO = g.node(o).grad;
    g.accumulate_grad(g.input(o, 0), dO);
    Var v = g.input(o, 1);
    if (!g.requires_grad(v)) return;
    auto& dV = g.grad_buffer(v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) dV[j] += dO[i * m + j];
    }
  });
}

template <class T>
Var Graph<T>::columns(Var x, std::size_t begin, std::size_t end) {
  const auto& X = value(x);
  require(X.rank() == 2 && begin < end && end <= X.dim(1), "columns",
          "range [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
              shape_string(X.shape()));
  const std::size_t n = X.dim(0), m = X.dim(1), w = end - begin;
  TensorT out(Shape{n, w});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(X.ptr() + i * m + begin, w, out.ptr() + i * w);
  }
  return push("columns", {x}, std::move(out), [n, m, w, begin](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < w; ++j) dX[i * m + begin + j] += dO[i * w + j];
    }
  });
}

template <class T>
Var Graph<T>::reshape(Var x, Shape shape) {
  TensorT out = value(x).reshaped(std::move(shape));
  return push("reshape", {x}, std::move(out), [](Graph& g, Var o) {
    Var x = g.input(o, 0);
    if (!g.requires_grad(x)) return;
    const auto& dO = g.node(o).grad;
    auto& dX = g.grad_buffer(x);
    for (std::size_t i = 0; i < dO.size(); ++i) dX[i] += dO[i];
  });
}

// ------------------------------------------------------ losses, sampling

template <class T>
Var Graph<T>::bernoulli_ce_from_logits(Var logits, const TensorT& targets) {
  const auto& L = value(logits);
  require(L.shape() == targets.shape(), "bernoulli_ce_from_logits",
          shapes(L.shape(), targets.shape()));
  for (T t : targets.span()) {
    if (t != T(0) && t != T(1)) throw DataError("bernoulli_ce_from_logits: targets must be 0 or 1");
  }
  TensorT out(L.shape());
  for (std::size_t i = 0; i < L.size(); ++i) out[i] = stable_softplus(L[i]) - targets[i] * L[i];
  auto t = std::make_shared<TensorT>(targets);
  return push("bernoulli_ce_from_logits", {logits}, std::move(out), [t](Graph& g, Var o) {
    Var l = g.input(o, 0);
    if (!g.requires_grad(l)) return;
    const auto& L = g.value(l);
    const auto& dO = g.node(o).grad;
    auto& dL = g.grad_buffer(l);
    for (std::size_t i = 0; i < dO.size(); ++i) dL[i] += dO[i] * (stable_sigmoid(L[i]) - (*t)[i]);
  });
}

template <class T>
Var Graph<T>::softmax_ce_from_logits(Var logits, std::span<const int> labels) {
  const auto& L = value(logits);
  require(L.rank() == 2 && L.dim(0) == labels.size(), "softmax_ce_from_logits",
          "logits " + shape_string(L.shape()) + " vs " + std::to_string(labels.size()) + " labels");
  const std::size_t n = L.dim(0), k = L.dim(1);
  auto lab = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
  for (int y : *lab) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw DataError("softmax_ce_from_logits: class index " + std::to_string(y) +
                      " out of range [0," + std::to_string(k) + ")");
    }
  }
  TensorT out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    auto row = L.row(i);
    const T mx = *std::max_element(row.begin(), row.end());
    T s = 0;
    for (T v : row) s += std::exp(v - mx);
    out[i] = mx + std::log(s) - row[static_cast<std::size_t>((*lab)[i])];
  }
  return push("softmax_ce_from_logits", {logits}, std::move(out), [lab, n, k](Graph& g, Var o) {
    Var l = g.input(o, 0);
    if (!g.requires_grad(l)) return;
    const auto& L = g.value(l);
    const auto& dO = g.node(o).grad;
    auto& dL = g.grad_buffer(l);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = L.row(i);
      const T mx = *std::max_element(row.begin(), row.end());
      T s = 0;
      for (T v : row) s += std::exp(v - mx);
      for (std::size_t j = 0; j < k; ++j) {
        const T p = std::exp(row[j] - mx) / s;
        const T onehot = static_cast<std::size_t>((*lab)[i]) == j ? T(1) : T(0);
        dL[i * k + j] += dO[i] * (p - onehot);
      }
    }
  });
}

template <class T>
Var Graph<T>::reparam_sample(Var mean, Var log_std, const TensorT& eps) {
  const auto& M = value(mean);
  const auto& S = value(log_std);
  require(M.shape() == S.shape() && M.shape() == eps.shape(), "reparam_sample",
          shapes(M.shape(), S.shape()) + " vs " + shape_string(eps.shape()));
  if (!eps.all_finite()) throw NumericError("reparam_sample: non-finite noise");
  TensorT out(M.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = M[i] + std::exp(S[i]) * eps[i];
  auto e = std::make_shared<TensorT>(eps);
  return push("reparam_sample", {mean, log_std}, std::move(out), [e](Graph& g, Var o) {
    Var mean = g.input(o, 0), log_std = g.input(o, 1);
    const auto& dO = g.node(o).grad;
    g.accumulate_grad(mean, dO);
    if (!g.requires_grad(log_std)) return;
    const auto& S = g.value(log_std);
    auto& dS = g.grad_buffer(log_std);
    for (std::size_t i = 0; i < dO.size(); ++i) dS[i] += dO[i] * std::exp(S[i]) * (*e)[i];
  });
}

template <class T>
Var Graph<T>::gaussian_log_density(Var z, Var mean, Var log_std) {
  const auto& Z = value(z);
  const auto& M = value(mean);
  const auto& S = value(log_std);
  require(Z.rank() == 2 && Z.shape() == M.shape() && Z.shape() == S.shape(),
          "gaussian_log_density", shapes(Z.shape(), M.shape()) + " vs " + shape_string(S.shape()));
  const std::size_t n = Z.dim(0), l = Z.dim(1);
  TensorT out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    T acc = 0;
    for (std::size_t j = 0; j < l; ++j) {
      const std::size_t p = i * l + j;
      const T u = (Z[p] - M[p]) * std::exp(-S[p]);
      acc += -S[p] - half_log_two_pi<T> - T(0.5) * u * u;
    }
    out[i] = acc;
  }
  return push("gaussian_log_density", {z, mean, log_std}, std::move(out), [n, l](Graph& g, Var o) {
    Var z = g.input(o, 0), mean = g.input(o, 1), log_std = g.input(o, 2);
    const auto& Z = g.value(z);
    const auto& M = g.value(mean);
    const auto& S = g.value(log_std);
    const auto& dO = g.node(o).grad;
    const bool gz = g.requires_grad(z), gm = g.requires_grad(mean), gs = g.requires_grad(log_std);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < l; ++j) {
        const std::size_t p = i * l + j;
        const T inv = std::exp(-S[p]);
        const T u = (Z[p] - M[p]) * inv;
        if (gz) g.grad_buffer(z)[p] -= dO[i] * u * inv;
        if (gm) g.grad_buffer(mean)[p] += dO[i] * u * inv;
        if (gs) g.grad_buffer(log_std)[p] += dO[i] * (u * u - T(1));
      }
    }
  });
}

template <class T>
Var Graph<T>::pairwise_gaussian_log_density(Var z, Var mean, Var log_std) {
  const auto& Z = value(z);
  const auto& M = value(mean);
  const auto& S = value(log_std);
  require(Z.rank() == 2 && M.rank() == 2 && M.shape() == S.shape() && Z.dim(1) == M.dim(1),
          "pairwise_gaussian_log_density",
          shapes(Z.shape(), M.shape()) + " vs " + shape_string(S.shape()));
  const std::size_t n = Z.dim(0), c = M.dim(0), l = Z.dim(1);
  TensorT out(Shape{n, c});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < c; ++m) {
      T acc = 0;
      for (std::size_t j = 0; j < l; ++j) {
        const T u = (Z[i * l + j] - M[m * l + j]) * std::exp(-S[m * l + j]);
        acc += -S[m * l + j] - half_log_two_pi<T> - T(0.5) * u * u;
      }
      out[i * c + m] = acc;
    }
  }
  return push("pairwise_gaussian_log_density", {z, mean, log_std}, std::move(out),
              [n, c, l](Graph& g, Var o) {
                Var z = g.input(o, 0), mean = g.input(o, 1), log_std = g.input(o, 2);
                const auto& Z = g.value(z);
                const auto& M = g.value(mean);
                const auto& S = g.value(log_std);
                const auto& dO = g.node(o).grad;
                const bool gz = g.requires_grad(z), gm = g.requires_grad(mean),
                           gs = g.requires_grad(log_std);
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t m = 0; m < c; ++m) {
                    const T d = dO[i * c + m];
                    for (std::size_t j = 0; j < l; ++j) {
                      const T inv = std::exp(-S[m * l + j]);
                      const T u = (Z[i * l + j] - M[m * l + j]) * inv;
                      if (gz) g.grad_buffer(z)[i * l + j] -= d * u * inv;
                      if (gm) g.grad_buffer(mean)[m * l + j] += d * u * inv;
                      if (gs) g.grad_buffer(log_std)[m * l + j] += d * (u * u - T(1));
                    }
                  }
                }
              });
}

template <class T>
Var Graph<T>::custom(std::string op, std::vector<Var> inputs, TensorT value, BackwardFn backward) {
  return push(std::move(op), std::move(inputs), std::move(value), std::move(backward));
}

// -------------------------------------------------------------- backward

template <class T>
TensorMap<T> Graph<T>::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_string(value(loss).shape()));
  }
  for (auto& n : nodes_) n.grad = TensorT();
  grad_buffer(loss)[0] = T(1);

  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || !n.requires_grad || n.grad.empty()) continue;
    n.backward(*this, Var{id});
    for (Var in : nodes_[id].inputs) {
      const Node& src = nodes_[in.id];
      if (!src.grad.empty() && !src.grad.all_finite()) {
        throw NumericError("backward: non-finite adjoint from '" + nodes_[id].op + "' into '" +
                           src.op + "'");
      }
    }
  }

  TensorMap<T> grads;
  for (const auto& name : param_names_) {
    Var v = param_index_.at(name);
    grads.insert(name, grad_buffer(v));
  }
  return grads;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace vaeprobe
