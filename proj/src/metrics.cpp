// Copyright 2026 The Demosel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "demosel/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "demosel/error.hpp"

namespace demosel {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, bool need_both) {
  if (scores.size() != labels.size()) {
    throw InputError("scores and labels differ in length (" + std::to_string(scores.size()) +
                     " vs " + std::to_string(labels.size()) + ")");
  }
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (need_both && (pos == 0 || pos == labels.size())) {
    throw UndefinedMetricError("metric needs at least one positive and one negative label");
  }
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, true);
  // Walk tie groups from the top; each negative in a group beats the
  // positives seen before it and half-ties those inside it.
  const auto idx = descending_order(scores);
  double concordant = 0.0;
  double positives_above = 0.0;
  double n_pos = 0.0;
  double n_neg = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    double group_pos = 0.0, group_neg = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? group_pos : group_neg) += 1.0;
      ++j;
    }
    concordant += group_neg * (positives_above + 0.5 * group_pos);
    positives_above += group_pos;
    n_pos += group_pos;
    n_neg += group_neg;
    i = j;
  }
  return concordant / (n_pos * n_neg);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, true);
  const auto idx = descending_order(scores);
  const double n_pos =
      static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, area = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / n_pos;
    const double precision = tp / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double f1(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels, false);
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const bool predicted = scores[k] >= threshold;
    if (predicted && labels[k] == 1) tp += 1.0;
    if (predicted && labels[k] == 0) fp += 1.0;
    if (!predicted && labels[k] == 1) fn += 1.0;
  }
  if (tp == 0.0) return 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

}  // namespace demosel
