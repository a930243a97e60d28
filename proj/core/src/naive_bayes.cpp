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

#include "vaeprobe/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "vaeprobe/errors.hpp"

namespace vaeprobe {

namespace {

std::vector<double> log_joint(const NaiveBayesModel& m, std::span<const float> image) {
  if (image.size() != m.dim) {
    throw ShapeError("naive Bayes: image has " + std::to_string(image.size()) +
                     " pixels, model expects " + std::to_string(m.dim));
  }
  std::vector<double> scores(m.log_prior);
  for (int c = 0; c < m.class_count; ++c) {
    const double* p1 = m.log_p1.data() + static_cast<std::size_t>(c) * m.dim;
    const double* p0 = m.log_p0.data() + static_cast<std::size_t>(c) * m.dim;
    double s = 0;
    for (std::size_t d = 0; d < m.dim; ++d) s += image[d] != 0.0f ? p1[d] : p0[d];
    scores[static_cast<std::size_t>(c)] += s;
  }
  return scores;
}

}  // namespace

std::vector<double> NaiveBayesModel::posterior(std::span<const float> image) const {
  auto scores = log_joint(*this, image);
  const double mx = *std::max_element(scores.begin(), scores.end());
  double total = 0;
  for (double s : scores) total += std::exp(s - mx);
  const double log_norm = mx + std::log(total);
  for (auto& s : scores) s = std::exp(s - log_norm);
  return scores;
}

int NaiveBayesModel::predict(std::span<const float> image) const {
  const auto scores = log_joint(*this, image);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

NaiveBayesModel naive_bayes_fit(const DatasetSplit& split, double alpha) {
  if (!(alpha > 0.0)) throw Error("naive_bayes_fit: alpha must be > 0");
  if (!split.labels) throw DataError("naive_bayes_fit: split '" + split.name + "' is unlabeled");
  split.validate(true);
  const auto k = static_cast<std::size_t>(split.class_count);
  const std::size_t d = split.cols;

  std::vector<double> class_n(k, 0.0);
  std::vector<double> ones(k * d, 0.0);
  for (std::size_t r = 0; r < split.rows; ++r) {
    const auto c = static_cast<std::size_t>((*split.labels)[r]);
    class_n[c] += 1.0;
    const float* x = split.images.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) ones[c * d + j] += x[j];
  }

  NaiveBayesModel m;
  m.class_count = split.class_count;
  m.dim = d;
  m.log_prior.resize(k);
  m.log_p1.resize(k * d);
  m.log_p0.resize(k * d);
  for (std::size_t c = 0; c < k; ++c) {
    m.log_prior[c] = std::log(class_n[c] / static_cast<double>(split.rows));
    for (std::size_t j = 0; j < d; ++j) {
      const double p = (ones[c * d + j] + alpha) / (class_n[c] + 2.0 * alpha);
      m.log_p1[c * d + j] = std::log(p);
      m.log_p0[c * d + j] = std::log1p(-p);
    }
  }
  return m;
}

std::vector<int> naive_bayes_transfer_labels(const NaiveBayesModel& model,
                                             const DatasetSplit& unlabeled) {
  if (unlabeled.cols != model.dim) {
    throw ShapeError("naive_bayes_transfer_labels: split has D=" + std::to_string(unlabeled.cols) +
                     ", model has D=" + std::to_string(model.dim));
  }
  unlabeled.validate(true);
  std::vector<int> labels(unlabeled.rows);
  for (std::size_t r = 0; r < unlabeled.rows; ++r) labels[r] = model.predict(unlabeled.image(r));
  return labels;
}

double naive_bayes_accuracy(const NaiveBayesModel& model, const DatasetSplit& labeled) {
  if (!labeled.labels) throw DataError("naive_bayes_accuracy: split is unlabeled");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labeled.rows; ++r) {
    correct += model.predict(labeled.image(r)) == (*labeled.labels)[r];
  }
  return static_cast<double>(correct) / static_cast<double>(labeled.rows);
}

}  // namespace vaeprobe
