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

#include "vaeprobe/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace vaeprobe {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string convergence_message(std::size_t component, double attained) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "fit_pca: component %zu did not converge (attained eigenvalue change %.3g)",
                component, attained);
  return buf;
}

void orthogonalize(Eigen::VectorXd& v, const MatrixRM& q, std::size_t found) {
  for (std::size_t j = 0; j < found; ++j) {
    const auto row = q.row(static_cast<Eigen::Index>(j));
    v -= row.dot(v) * row.transpose();
  }
}

void canonical_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0.0) v = -v;
}

void check_usable(const PcaBasis& basis) {
  for (std::size_t c = 0; c < basis.k; ++c) {
    if (!(basis.eigenvalues[c] > kMinUsableEigenvalue)) {
      throw DataError("pca: component " + std::to_string(c) +
                      " has zero eigenvalue and cannot be whitened");
    }
  }
}

}  // namespace

PcaConvergenceError::PcaConvergenceError(std::size_t component, double attained)
    : NumericError(convergence_message(component, attained)), component_(component), attained_(attained) {}

double PcaBasis::orthonormality_error() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += components[a * dim + d] * components[b * dim + d];
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

PcaBasis fit_pca(std::span<const double> data, std::size_t rows, std::size_t cols, std::size_t k,
                 const PcaOptions& options) {
  if (data.size() != rows * cols) throw ShapeError("fit_pca: data size does not match rows x cols");
  if (k < 1 || k > cols) {
    throw ConfigError("fit_pca: k must be in [1, " + std::to_string(cols) + "], got " + std::to_string(k));
  }
  if (rows <= k) throw DataError("fit_pca: need more examples than components");

  const auto n = static_cast<Eigen::Index>(rows), d = static_cast<Eigen::Index>(cols);
  Eigen::Map<const MatrixRM> x(data.data(), n, d);
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const MatrixRM centered = x.rowwise() - mu;
  MatrixRM cov = (centered.transpose() * centered) / static_cast<double>(rows);

  PcaBasis basis;
  basis.dim = cols;
  basis.k = k;
  basis.mean.assign(mu.data(), mu.data() + d);
  MatrixRM q = MatrixRM::Zero(static_cast<Eigen::Index>(k), d);
  basis.eigenvalues.resize(k);

  // Below this the deflated covariance is rounding noise: a null direction.
  const double null_norm = 1e-13 * std::max(cov.trace(), std::numeric_limits<double>::min());
  const Rng root(options.seed);
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng = root.derive(static_cast<std::uint64_t>(c));
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.gaussian();
    orthogonalize(v, q, c);
    v.normalize();

    double lambda = 0.0, change = INFINITY;
    bool converged = false;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      Eigen::VectorXd w = cov * v;
      orthogonalize(w, q, c);
      const double next = v.dot(w);
      const double norm = w.norm();
      if (norm <= null_norm) {
        lambda = 0.0;
        converged = true;
        break;
      }
      w /= norm;
      const double moved = std::min((w - v).norm(), (w + v).norm());
      change = std::abs(next - lambda);
      v = w;
      lambda = next;
      if (it > 0 && change <= options.tolerance * std::max(1.0, std::abs(lambda)) &&
          moved <= options.vector_tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) throw PcaConvergenceError(c, change);
    orthogonalize(v, q, c);
    v.normalize();
    canonical_sign(v);
    q.row(static_cast<Eigen::Index>(c)) = v.transpose();
    const double rayleigh = v.dot(cov * v);
    basis.eigenvalues[c] = std::max(0.0, rayleigh);
    cov -= rayleigh * (v * v.transpose());
  }

  // Near-degenerate pairs can come out a hair out of order.
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return basis.eigenvalues[a] > basis.eigenvalues[b];
  });
  basis.components.resize(k * cols);
  std::vector<double> sorted(k);
  for (std::size_t i = 0; i < k; ++i) {
    sorted[i] = basis.eigenvalues[order[i]];
    const auto row = q.row(static_cast<Eigen::Index>(order[i]));
    std::copy(row.data(), row.data() + d, basis.components.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  basis.eigenvalues = std::move(sorted);
  return basis;
}

PcaBasis fit_pca(const DatasetSplit& images, std::size_t k, const PcaOptions& options) {
  std::vector<double> data(images.images.begin(), images.images.end());
  return fit_pca(data, images.rows, images.cols, k, options);
}

double pca_rate(std::size_t k, double sigma) {
  if (k < 1) throw ConfigError("pca_rate: k must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("pca_rate: sigma must be > 0");
  return 0.5 * static_cast<double>(k) * std::log1p(1.0 / (sigma * sigma));
}

double pca_sigma_for_rate(std::size_t k, double rate_nats) {
  if (k < 1) throw ConfigError("pca_sigma_for_rate: k must be >= 1");
  if (!(rate_nats > 0.0)) throw ConfigError("pca_sigma_for_rate: rate must be > 0");
  return 1.0 / std::sqrt(std::expm1(2.0 * rate_nats / static_cast<double>(k)));
}

Tensor pca_whiten(const PcaBasis& basis, const DatasetSplit& images) {
  if (images.cols != basis.dim) {
    throw ShapeError("pca_whiten: images have " + std::to_string(images.cols) + " columns, basis " +
                     std::to_string(basis.dim));
  }
  check_usable(basis);
  Tensor out(Shape{images.rows, basis.k});
  std::vector<double> centered(basis.dim);
  for (std::size_t i = 0; i < images.rows; ++i) {
    const auto x = images.image(i);
    for (std::size_t d = 0; d < basis.dim; ++d) centered[d] = x[d] - basis.mean[d];
    for (std::size_t c = 0; c < basis.k; ++c) {
      const auto q = basis.component(c);
      double dot = 0.0;
      for (std::size_t d = 0; d < basis.dim; ++d) dot += q[d] * centered[d];
      out.at(i, c) = static_cast<float>(dot / std::sqrt(basis.eigenvalues[c]));
    }
  }
  return out;
}

Tensor stochastic_pca_encode(const PcaBasis& basis, const DatasetSplit& images, double sigma,
                             Rng& rng) {
  if (!(sigma > 0.0)) throw ConfigError("stochastic_pca_encode: sigma must be > 0");
  Tensor out = pca_whiten(basis, images);
  for (float& v : out.span()) v = static_cast<float>(v + sigma * rng.gaussian());
  return out;
}

GaussianEncoding pca_encoding(const PcaBasis& basis, const DatasetSplit& images, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("pca_encoding: sigma must be > 0");
  Tensor mean = pca_whiten(basis, images);
  Tensor sd(mean.shape(), static_cast<float>(sigma));
  return GaussianEncoding::gaussian(std::move(mean), std::move(sd));
}

}  // namespace vaeprobe
