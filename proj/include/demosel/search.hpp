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

// Budgeted demonstration search: full greedy and lazy greedy over a frontier
// that grows along graph edges from each selected node.

#ifndef DEMOSEL_SEARCH_HPP_
#define DEMOSEL_SEARCH_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "demosel/cohorts.hpp"
#include "demosel/gain.hpp"
#include "demosel/retrieval.hpp"
#include "demosel/simgraph.hpp"

namespace demosel {

enum class SearchMode { kFullGreedy, kLazyGreedy, kIndividualTopK };
enum class StopReason { kBudgetReached, kNoPositiveGain, kFrontierExhausted, kAborted };
enum class Ablation { kNone, kNoCohort, kNoGreedy };

std::string_view to_string(SearchMode mode);
std::string_view to_string(StopReason reason);
std::string_view to_string(Ablation ablation);
SearchMode parse_search_mode(std::string_view name);  // "lazy" | "full"
Ablation parse_ablation(std::string_view name);       // "none" | "no-cohort" | "no-greedy"

struct SelectionStep {
  NodeId node = 0;
  double gain = 0.0;
  std::size_t round = 0;
};

/// A node entering the frontier: anchors at round 0, expansions at the round
/// following the selection that exposed them.
struct FrontierEvent {
  NodeId node = 0;
  FrontierOrigin origin = FrontierOrigin::kAnchor;
  std::size_t round = 0;
};

struct SelectionTrace {
  std::string query_id;
  std::vector<SelectionStep> selected;
  std::vector<std::size_t> frontier_sizes;  // frontier size at the start of each round
  std::size_t oracle_calls = 0;
  StopReason stop_reason = StopReason::kBudgetReached;
  SearchMode mode = SearchMode::kLazyGreedy;
  bool early_stop = true;
  Ablation ablation = Ablation::kNone;
  bool complete = true;  // false when an oracle failure aborted the search
  std::string error;
  std::vector<CohortId> retrieved_cohorts;
  std::vector<FrontierEvent> frontier_log;

  std::vector<NodeId> selected_ids() const;
};

struct SearchOptions {
  std::size_t budget = 4;
  bool early_stop = true;
  // Concurrent oracle calls within one full-greedy round.
  unsigned parallelism = 1;
};

/// Scores every frontier member each round and takes the argmax (ties by
/// ascending id). With early stopping, a best gain <= 0 ends the search and
/// that candidate is not added.
SelectionTrace full_greedy_select(const Query& query, Frontier frontier,
                                  const SimilarityGraph& graph, GainOracle& oracle,
                                  const SearchOptions& options);

/// Same selection rule driven by a max-queue of cached gains that are only
/// recomputed when stale. Returns the full-greedy sequence whenever the
/// oracle is submodular.
SelectionTrace lazy_greedy_select(const Query& query, Frontier frontier,
                                  const SimilarityGraph& graph, GainOracle& oracle,
                                  const SearchOptions& options);

/// Ablation without composition awareness or expansion: rank the initial
/// frontier by gain from the empty set and keep the best `budget`.
SelectionTrace individual_topk_select(const Query& query, const Frontier& frontier,
                                      GainOracle& oracle, const SearchOptions& options);

struct PipelineConfig {
  std::size_t budget = 4;
  std::size_t k_c = 3;
  std::size_t k_a = 3;
  SearchMode mode = SearchMode::kLazyGreedy;
  bool early_stop = true;
  Ablation ablation = Ablation::kNone;
  unsigned parallelism = 1;
};

/// Cohort retrieval -> anchors -> search. Throws ConfigError when the graph or
/// partition was built from a different corpus.
SelectionTrace select_demonstrations(const Query& query, const Corpus& corpus,
                                     const SimilarityGraph& graph,
                                     const CohortPartition& partition, GainOracle& oracle,
                                     const PipelineConfig& config);

std::string trace_to_json(const SelectionTrace& trace, const Corpus& corpus);

}  // namespace demosel

#endif  // DEMOSEL_SEARCH_HPP_
