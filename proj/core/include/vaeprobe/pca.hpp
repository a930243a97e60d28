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

#ifndef VAEPROBE_PCA_HPP
#define VAEPROBE_PCA_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "vaeprobe/datasets.hpp"
#include "vaeprobe/errors.hpp"
#include "vaeprobe/probe.hpp"

namespace vaeprobe {

/// Eigenvalues at or below this are unusable for whitening.
inline constexpr double kMinUsableEigenvalue = 1e-10;

struct PcaBasis {
  std::size_t dim = 0;
  std::size_t k = 0;
  std::vector<double> mean;         // [D]
  std::vector<double> components;   // [k*D], row-major, orthonormal rows
  std::vector<double> eigenvalues;  // [k], nonincreasing

  std::span<const double> component(std::size_t i) const {
    return std::span<const double>(components).subspan(i * dim, dim);
  }
  /// max |Q Q^T - I| over all entries.
  double orthonormality_error() const;
};

struct PcaOptions {
  /// Stop when the Rayleigh quotient changes by less than this (scaled by
  /// max(1, |lambda|)) and the unit vector moves by less than
  /// `vector_tolerance`.
  double tolerance = 1e-10;
  double vector_tolerance = 1e-9;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 0;
};

class PcaConvergenceError : public NumericError {
 public:
  PcaConvergenceError(std::size_t component, double attained);
  std::size_t component() const { return component_; }
  double attained_tolerance() const { return attained_; }

 private:
  std::size_t component_;
  double attained_;
};

/// Top-k principal directions of row-major data [rows, cols] via power
/// iteration with deflation on the (1/N) covariance. Each component is
/// signed so that its largest-magnitude entry is positive.
PcaBasis fit_pca(std::span<const double> data, std::size_t rows, std::size_t cols, std::size_t k,
                 const PcaOptions& options = {});
PcaBasis fit_pca(const DatasetSplit& images, std::size_t k, const PcaOptions& options = {});

/// (k/2) ln(1 + 1/sigma^2) nats.
double pca_rate(std::size_t k, double sigma);
/// Inverse of pca_rate in sigma.
double pca_sigma_for_rate(std::size_t k, double rate_nats);

/// Centered projections divided by sqrt(eigenvalue): [n, k].
Tensor pca_whiten(const PcaBasis& basis, const DatasetSplit& images);
/// Whitened projections plus N(0, sigma^2) noise per coordinate.
Tensor stochastic_pca_encode(const PcaBasis& basis, const DatasetSplit& images, double sigma,
                             Rng& rng);
/// The same channel as a Gaussian source for the probe.
GaussianEncoding pca_encoding(const PcaBasis& basis, const DatasetSplit& images, double sigma);

}  // namespace vaeprobe

#endif  // VAEPROBE_PCA_HPP
