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

#ifndef VAEPROBE_NAIVE_BAYES_HPP
#define VAEPROBE_NAIVE_BAYES_HPP

#include <span>
#include <vector>

#include "vaeprobe/datasets.hpp"

namespace vaeprobe {

/// Bernoulli naive Bayes over binary pixels.
struct NaiveBayesModel {
  int class_count = 0;
  std::size_t dim = 0;
  std::vector<double> log_prior;  // [K]
  std::vector<double> log_p1;     // [K*D], log p(x_d = 1 | c)
  std::vector<double> log_p0;     // [K*D], log p(x_d = 0 | c)

  /// Posterior p(c | x), normalized in log space.
  std::vector<double> posterior(std::span<const float> image) const;
  /// argmax posterior; ties go to the lowest class index.
  int predict(std::span<const float> image) const;
};

/// Pixel parameter (count_1 + alpha) / (n_c + 2 alpha); priors are class
/// frequencies. Requires binary, labeled data and alpha > 0.
NaiveBayesModel naive_bayes_fit(const DatasetSplit& split, double alpha = 1.0);

std::vector<int> naive_bayes_transfer_labels(const NaiveBayesModel& model,
                                             const DatasetSplit& unlabeled);

double naive_bayes_accuracy(const NaiveBayesModel& model, const DatasetSplit& labeled);

}  // namespace vaeprobe

#endif  // VAEPROBE_NAIVE_BAYES_HPP
