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

#include "vaeprobe/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace vaeprobe {

namespace {

double evaluate(const LossBuilder& build, const TensorMap<double>& params) {
  Graph<double> g;
  return g.value(build(g, params)).item();
}

}  // namespace

GradCheckReport finite_difference_check(const LossBuilder& build, const TensorMap<double>& params,
                                        const GradCheckOptions& options) {
  TensorMap<double> analytic;
  {
    Graph<double> g;
    Var loss = build(g, params);
    g.params(params);
    analytic = g.backward(loss);
  }

  GradCheckReport report;
  TensorMap<double> probe = params;
  for (auto& [name, value] : probe) {
    GradCheckEntry entry;
    entry.name = name;
    const auto& a = analytic.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double original = value[i];
      value[i] = original + options.step;
      const double up = evaluate(build, probe);
      value[i] = original - options.step;
      const double down = evaluate(build, probe);
      value[i] = original;

      const double numeric = (up - down) / (2.0 * options.step);
      const double abs_err = std::abs(a[i] - numeric);
      const double scale = std::max({std::abs(a[i]), std::abs(numeric), options.scale_floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, abs_err / scale);
    }
    entry.passed = entry.max_rel_error < options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace vaeprobe
