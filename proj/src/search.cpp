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

#include "demosel/search.hpp"

#include <algorithm>
#include <future>
#include <queue>

#include "demosel/error.hpp"
#include "json.hpp"

namespace demosel {

std::string_view to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::kFullGreedy:
      return "full_greedy";
    case SearchMode::kLazyGreedy:
      return "lazy_greedy";
    case SearchMode::kIndividualTopK:
      break;
  }
  return "individual_topk";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kBudgetReached:
      return "budget_reached";
    case StopReason::kNoPositiveGain:
      return "no_positive_gain";
    case StopReason::kFrontierExhausted:
      return "frontier_exhausted";
    case StopReason::kAborted:
      break;
  }
  return "aborted";
}

std::string_view to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone:
      return "none";
    case Ablation::kNoCohort:
      return "no-cohort";
    case Ablation::kNoGreedy:
      break;
  }
  return "no-greedy";
}

SearchMode parse_search_mode(std::string_view name) {
  if (name == "lazy") return SearchMode::kLazyGreedy;
  if (name == "full") return SearchMode::kFullGreedy;
  throw ConfigError("unknown search mode '" + std::string(name) + "'");
}

Ablation parse_ablation(std::string_view name) {
  if (name == "none") return Ablation::kNone;
  if (name == "no-cohort") return Ablation::kNoCohort;
  if (name == "no-greedy") return Ablation::kNoGreedy;
  throw ConfigError("unknown ablation '" + std::string(name) + "'");
}

std::vector<NodeId> SelectionTrace::selected_ids() const {
  std::vector<NodeId> out;
  out.reserve(selected.size());
  for (const auto& s : selected) out.push_back(s.node);
  return out;
}

namespace {

bool is_oracle_failure(const Error& e) {
  return dynamic_cast<const OracleUnavailableError*>(&e) != nullptr ||
         dynamic_cast<const ProtocolError*>(&e) != nullptr;
}

SelectionTrace start_trace(const Query& query, const Frontier& frontier, SearchMode mode,
                           const SearchOptions& options) {
  SelectionTrace t;
  t.query_id = query.id;
  t.mode = mode;
  t.early_stop = options.early_stop;
  for (NodeId v : frontier.members()) t.frontier_log.push_back({v, FrontierOrigin::kAnchor, 0});
  return t;
}

void check_frontier(const Frontier& frontier, const SimilarityGraph& graph) {
  if (!frontier.empty() && *frontier.members().rbegin() >= graph.size()) {
    throw InvalidNodeError("frontier member outside the graph");
  }
}

void abort_trace(SelectionTrace& t, const Error& e) {
  t.complete = false;
  t.stop_reason = StopReason::kAborted;
  t.error = e.what();
}

// Adds the neighbours of `selected` that are new to the frontier and returns
// them in id order.
std::vector<NodeId> expand(Frontier& frontier, const SimilarityGraph& graph, NodeId selected,
                           std::size_t round, SelectionTrace& trace) {
  auto nb = graph.neighbors(selected);
  std::vector<NodeId> sorted(nb.begin(), nb.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<NodeId> added;
  for (NodeId u : sorted) {
    if (frontier.add(u, FrontierOrigin::kExpansion)) {
      added.push_back(u);
      trace.frontier_log.push_back({u, FrontierOrigin::kExpansion, round});
    }
  }
  return added;
}

std::vector<double> score_all(const Query& query, const std::vector<NodeId>& demos,
                              const std::vector<NodeId>& candidates, GainOracle& oracle,
                              unsigned parallelism) {
  std::vector<double> gains(candidates.size());
  if (parallelism <= 1 || candidates.size() < 2) {
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      gains[k] = oracle.marginal_gain(query, demos, candidates[k]);
    }
    return gains;
  }
  const std::size_t workers = std::min<std::size_t>(parallelism, candidates.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < candidates.size(); k += workers) {
        gains[k] = oracle.marginal_gain(query, demos, candidates[k]);
      }
    }));
  }
  for (auto& j : jobs) j.get();
  return gains;
}

}  // namespace

SelectionTrace full_greedy_select(const Query& query, Frontier frontier,
                                  const SimilarityGraph& graph, GainOracle& oracle,
                                  const SearchOptions& options) {
  check_frontier(frontier, graph);
  SelectionTrace trace = start_trace(query, frontier, SearchMode::kFullGreedy, options);
  std::vector<NodeId> demos;
  try {
    while (demos.size() < options.budget && !frontier.empty()) {
      const std::vector<NodeId> candidates(frontier.members().begin(), frontier.members().end());
      trace.frontier_sizes.push_back(candidates.size());
      const std::vector<double> gains = score_all(query, demos, candidates, oracle, options.parallelism);
      trace.oracle_calls += candidates.size();

      std::size_t best = 0;
      for (std::size_t k = 1; k < candidates.size(); ++k) {
        if (gains[k] > gains[best]) best = k;  // ascending ids: first max wins ties
      }
      if (options.early_stop && gains[best] <= 0.0) {
        trace.stop_reason = StopReason::kNoPositiveGain;
        return trace;
      }
      const NodeId chosen = candidates[best];
      trace.selected.push_back({chosen, gains[best], demos.size()});
      demos.push_back(chosen);
      frontier.exclude(chosen);
      expand(frontier, graph, chosen, demos.size(), trace);
    }
  } catch (const Error& e) {
    if (!is_oracle_failure(e)) throw;
    abort_trace(trace, e);
    return trace;
  }
  trace.stop_reason = demos.size() >= options.budget ? StopReason::kBudgetReached
                                                     : StopReason::kFrontierExhausted;
  return trace;
}

namespace {

struct QueueEntry {
  double gain;
  NodeId node;
  std::size_t stamp;  // |S| when the gain was computed
};

// True when `a` should be selected over `b`: larger gain, then smaller id.
bool preferred(const QueueEntry& a, const QueueEntry& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  return a.node < b.node;
}

struct LowerPriority {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const { return preferred(b, a); }
};

}  // namespace

SelectionTrace lazy_greedy_select(const Query& query, Frontier frontier,
                                  const SimilarityGraph& graph, GainOracle& oracle,
                                  const SearchOptions& options) {
  check_frontier(frontier, graph);
  SelectionTrace trace = start_trace(query, frontier, SearchMode::kLazyGreedy, options);
  if (options.budget == 0) {
    trace.stop_reason = StopReason::kBudgetReached;
    return trace;
  }
  std::vector<NodeId> demos;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, LowerPriority> queue;
  auto evaluate = [&](NodeId v) {
    ++trace.oracle_calls;
    return oracle.marginal_gain(query, demos, v);
  };

  try {
    for (NodeId v : frontier.members()) queue.push({evaluate(v), v, 0});

    while (demos.size() < options.budget) {
      if (queue.empty()) {
        trace.stop_reason = StopReason::kFrontierExhausted;
        return trace;
      }
      trace.frontier_sizes.push_back(frontier.size());
      const std::size_t round = demos.size();
      QueueEntry best{};
      for (;;) {
        QueueEntry top = queue.top();
        queue.pop();
        if (top.stamp == round) {
          best = top;
          break;
        }
        top.gain = evaluate(top.node);
        top.stamp = round;
        if (queue.empty() || preferred(top, queue.top())) {
          best = top;
          break;
        }
        queue.push(top);
      }

      if (options.early_stop && best.gain <= 0.0) {
        trace.stop_reason = StopReason::kNoPositiveGain;
        return trace;
      }
      trace.selected.push_back({best.node, best.gain, round});
      demos.push_back(best.node);
      frontier.exclude(best.node);
      const auto added = expand(frontier, graph, best.node, demos.size(), trace);
      if (demos.size() == options.budget) break;  // no later round reads these gains
      for (NodeId u : added) queue.push({evaluate(u), u, demos.size()});
    }
  } catch (const Error& e) {
    if (!is_oracle_failure(e)) throw;
    abort_trace(trace, e);
    return trace;
  }
  trace.stop_reason = StopReason::kBudgetReached;
  return trace;
}

SelectionTrace individual_topk_select(const Query& query, const Frontier& frontier,
                                      GainOracle& oracle, const SearchOptions& options) {
  SelectionTrace trace = start_trace(query, frontier, SearchMode::kIndividualTopK, options);
  if (options.budget == 0) {
    trace.stop_reason = StopReason::kBudgetReached;
    return trace;
  }
  const std::vector<NodeId> candidates(frontier.members().begin(), frontier.members().end());
  trace.frontier_sizes.push_back(candidates.size());
  std::vector<double> gains;
  try {
    gains = score_all(query, {}, candidates, oracle, options.parallelism);
  } catch (const Error& e) {
    if (!is_oracle_failure(e)) throw;
    abort_trace(trace, e);
    return trace;
  }
  trace.oracle_calls = candidates.size();

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  for (std::size_t k : order) {
    if (trace.selected.size() == options.budget) break;
    if (options.early_stop && gains[k] <= 0.0) {
      trace.stop_reason = StopReason::kNoPositiveGain;
      return trace;
    }
    trace.selected.push_back({candidates[k], gains[k], trace.selected.size()});
  }
  trace.stop_reason = trace.selected.size() == options.budget ? StopReason::kBudgetReached
                                                              : StopReason::kFrontierExhausted;
  return trace;
}

SelectionTrace select_demonstrations(const Query& query, const Corpus& corpus,
                                     const SimilarityGraph& graph,
                                     const CohortPartition& partition, GainOracle& oracle,
                                     const PipelineConfig& config) {
  if (graph.size() != corpus.size()) {
    throw ConfigError("graph has " + std::to_string(graph.size()) + " nodes, corpus has " +
                      std::to_string(corpus.size()));
  }
  if (!graph.corpus_hash().empty() && graph.corpus_hash() != corpus.content_hash()) {
    throw ConfigError("graph was built from a different corpus");
  }
  if (!partition.corpus_hash.empty() && partition.corpus_hash != corpus.content_hash()) {
    throw ConfigError("cohorts were built from a different corpus");
  }
  if (!partition.graph_hash.empty() && partition.graph_hash != graph.content_hash()) {
    throw ConfigError("cohorts were built from a different graph");
  }

  std::vector<CohortId> retrieved;
  Frontier frontier;
  if (config.ablation == Ablation::kNoCohort) {
    frontier = init_global_anchors(query, corpus, config.k_c * config.k_a);
  } else {
    retrieved = retrieve_cohorts(query, partition, config.k_c);
    frontier = init_anchors(query, partition, retrieved, config.k_a, corpus);
  }

  const SearchOptions options{config.budget, config.early_stop, config.parallelism};
  SelectionTrace trace;
  if (config.ablation == Ablation::kNoGreedy) {
    trace = individual_topk_select(query, frontier, oracle, options);
  } else if (config.mode == SearchMode::kFullGreedy) {
    trace = full_greedy_select(query, std::move(frontier), graph, oracle, options);
  } else {
    trace = lazy_greedy_select(query, std::move(frontier), graph, oracle, options);
  }
  trace.retrieved_cohorts = std::move(retrieved);
  trace.ablation = config.ablation;
  return trace;
}

std::string trace_to_json(const SelectionTrace& trace, const Corpus& corpus) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["query_id"] = trace.query_id;
  j["mode"] = to_string(trace.mode);
  j["early_stop"] = trace.early_stop;
  j["ablation"] = to_string(trace.ablation);
  j["stop_reason"] = to_string(trace.stop_reason);
  j["complete"] = trace.complete;
  if (!trace.error.empty()) j["error"] = trace.error;
  j["oracle_calls"] = trace.oracle_calls;
  j["retrieved_cohorts"] = trace.retrieved_cohorts;
  j["frontier_sizes"] = trace.frontier_sizes;
  auto selected = ordered_json::array();
  for (const auto& s : trace.selected) {
    selected.push_back({{"node", s.node}, {"id", corpus[s.node].id}, {"gain", s.gain},
                        {"round", s.round}});
  }
  j["selected"] = std::move(selected);
  auto log = ordered_json::array();
  for (const auto& e : trace.frontier_log) {
    log.push_back({{"node", e.node},
                   {"id", corpus[e.node].id},
                   {"origin", e.origin == FrontierOrigin::kAnchor ? "anchor" : "expansion"},
                   {"round", e.round}});
  }
  j["frontier_log"] = std::move(log);
  return j.dump(2) + "\n";
}

}  // namespace demosel
