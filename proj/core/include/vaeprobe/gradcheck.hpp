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

#ifndef VAEPROBE_GRADCHECK_HPP
#define VAEPROBE_GRADCHECK_HPP

#include <functional>
#include <string>
#include <vector>

#include "vaeprobe/graph.hpp"

namespace vaeprobe {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Builds a scalar loss from parameters. Must register every parameter it
/// uses through Graph::param / Graph::params and be deterministic.
using LossBuilder = std::function<Var(Graph<double>&, const TensorMap<double>&)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double scale_floor = 1e-3;
};

/// Compares reverse-mode gradients against central finite differences,
/// element by element, and reports the worst relative error per parameter.
GradCheckReport finite_difference_check(const LossBuilder& build, const TensorMap<double>& params,
                                        const GradCheckOptions& options = {});

struct PrimitiveCheck {
  std::string primitive;
  std::size_t cases = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Names accepted by check_primitive.
std::vector<std::string> differentiable_primitives();

/// Finite-difference check of one primitive on `cases` random inputs drawn
/// from [-2, 2] (shifted to [0.25, 2] where the domain requires it). The
/// primitive's output is reduced to a scalar through a fixed random linear
/// functional so that every output element contributes.
PrimitiveCheck check_primitive(const std::string& primitive, std::size_t cases, std::uint64_t seed,
                               const GradCheckOptions& options = {});
std::vector<PrimitiveCheck> check_primitives(std::size_t cases, std::uint64_t seed,
                                             const GradCheckOptions& options = {});

}  // namespace vaeprobe

#endif  // VAEPROBE_GRADCHECK_HPP
