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

// Baseline selectors and the synthetic pilot: mean ΔH per shot count and
// downstream metrics for each selection method.

#ifndef DEMOSEL_HARNESS_HPP_
#define DEMOSEL_HARNESS_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "demosel/gain.hpp"
#include "demosel/search.hpp"
#include "demosel/synthetic.hpp"

namespace demosel {

enum class Method {
  kRandom,
  kTopkEmbedding,
  kPerExampleEntropy,
  kFrontierGreedy,      // cohort retrieval + lazy greedy
  kFrontierGreedyFull,  // same pipeline, full greedy
};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// Methods that need no graph: random, topk_embedding, per_example_entropy.
/// `oracle` is only consulted by per_example_entropy and may be null
/// otherwise. Throws ConfigError when K exceeds the corpus size.
std::vector<NodeId> baseline_select(Method method, const Query& query, const Corpus& corpus,
                                    GainOracle* oracle, std::size_t k, std::uint64_t seed);

/// Forwards to another oracle and counts calls.
class CountingOracle : public GainOracle {
 public:
  explicit CountingOracle(GainOracle& inner) : inner_(inner) {}

  OracleKind kind() const override { return inner_.kind(); }
  double marginal_gain(const Query& query, std::span<const NodeId> demos,
                       NodeId candidate) override;
  std::optional<double> cond_score(const Query& query, std::span<const NodeId> demos) override {
    return inner_.cond_score(query, demos);
  }
  std::string identity() const override { return inner_.identity(); }

  std::size_t calls() const { return calls_.load(); }

 private:
  GainOracle& inner_;
  std::atomic<std::size_t> calls_{0};
};

/// Builds the gain oracle for one query of a generated dataset.
using OracleFactory =
    std::function<std::unique_ptr<GainOracle>(const SyntheticData& data, const Query& query)>;

/// Coverage oracle over the generator's feature blocks.
OracleFactory coverage_oracle_factory();

struct PilotOptions {
  SyntheticSpec spec;
  std::vector<Method> methods = {Method::kRandom, Method::kTopkEmbedding,
                                 Method::kPerExampleEntropy, Method::kFrontierGreedy};
  std::size_t min_k = 1;
  std::size_t max_k = 4;
  std::size_t k_g = 8;
  std::size_t k_c = 3;
  std::size_t k_a = 3;
  double resolution = 0.9;
  bool early_stop = true;
  unsigned parallelism = 1;  // concurrent queries
  double f1_threshold = 0.5;
};

struct QueryResult {
  std::string query_id;
  std::vector<NodeId> selected;
  double delta_h = 0.0;
  double prediction = 0.5;
  int label = 0;
  std::size_t oracle_calls = 0;
};

struct ReportRow {
  Method method = Method::kRandom;
  std::size_t k = 0;
  std::size_t n_queries = 0;
  double mean_delta_h = 0.0;
  // Absent when the query labels are single-class.
  std::optional<double> auroc;
  std::optional<double> auprc;
  double f1 = 0.0;
  std::size_t oracle_calls = 0;
  double wall_ms = 0.0;
  std::vector<QueryResult> queries;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // ordered by method, then k
  bool partial = false;         // an oracle error cut the run short
  std::string error;

  /// Mean ΔH curve of one method over k = min_k..max_k.
  std::vector<double> delta_h_curve(Method method) const;
  const ReportRow* find(Method method, std::size_t k) const;
};

/// Generates the spec's data, builds the graph and cohorts, and evaluates
/// every method at every shot count. The predictor for a query is the mean
/// label of its demonstrations (0.5 with none).
EvalReport run_pilot(const PilotOptions& options, const OracleFactory& factory = {});

std::string report_to_json(const EvalReport& report);
/// Same rows without wall time, so reruns compare byte for byte.
std::string report_to_csv(const EvalReport& report);

}  // namespace demosel

#endif  // DEMOSEL_HARNESS_HPP_
