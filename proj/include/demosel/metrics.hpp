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

// Binary classification metrics.

#ifndef DEMOSEL_METRICS_HPP_
#define DEMOSEL_METRICS_HPP_

#include <span>

namespace demosel {

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Throws UndefinedMetricError on single-class labels.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Average precision: Σ_k (R_k − R_{k−1}) P_k over descending distinct score
/// thresholds (tied scores enter together).
double auprc(std::span<const double> scores, std::span<const int> labels);

/// F1 of the rule `score >= threshold`. Zero when there are no true
/// positives.
double f1(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

}  // namespace demosel

#endif  // DEMOSEL_METRICS_HPP_
