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

// Cohort discovery by modularity optimization (Leiden, with Louvain as the
// ablation variant) and cohort prototypes.

#ifndef DEMOSEL_COHORTS_HPP_
#define DEMOSEL_COHORTS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "demosel/core.hpp"
#include "demosel/simgraph.hpp"

namespace demosel {

using CohortId = std::size_t;

enum class CommunityMethod { kLeiden, kLouvain };

std::string_view to_string(CommunityMethod method);
CommunityMethod parse_community_method(std::string_view name);

struct CohortPartition {
  std::vector<CohortId> assignment;           // node -> cohort
  std::vector<std::vector<NodeId>> cohorts;   // ascending members
  std::vector<Vector> prototypes;             // mean embedding per cohort
  double modularity = 0.0;
  CommunityMethod method = CommunityMethod::kLeiden;
  double resolution = 1.0;
  std::uint64_t seed = 0;
  // Modularity of the flattened partition after each level, in order.
  std::vector<double> level_modularity;
  std::string corpus_hash;
  std::string graph_hash;

  std::size_t size() const { return cohorts.size(); }
};

/// Q = (1/2m) Σ_ij (A_ij − γ d_i d_j / 2m) 𝟙(c_i = c_j) over the unweighted
/// adjacency. Throws UndefinedModularityError when the graph has no edges.
double modularity(const SimilarityGraph& graph, std::span<const CohortId> assignment,
                  double resolution = 1.0);

struct CohortOptions {
  CommunityMethod method = CommunityMethod::kLeiden;
  double resolution = 0.9;
  std::uint64_t seed = 0;
  // Independent runs with derived seeds; the highest modularity wins.
  int restarts = 1;
  int max_levels = 100;
  double tolerance = 1e-10;
};

/// Deterministic for a fixed (graph, options). Cohorts are numbered by their
/// smallest member. Prototypes are left empty; see attach_prototypes.
CohortPartition discover_cohorts(const SimilarityGraph& graph, const CohortOptions& options = {});

/// z_m = mean of member embeddings.
std::vector<Vector> prototypes(const std::vector<std::vector<NodeId>>& cohorts,
                               const Corpus& corpus);
void attach_prototypes(CohortPartition& partition, const Corpus& corpus);

/// True when every cohort induces a connected subgraph.
bool cohorts_connected(const SimilarityGraph& graph, const CohortPartition& partition);

/// Builds the partition bookkeeping (cohort lists, numbering) from a raw
/// node -> label map.
CohortPartition partition_from_assignment(std::span<const std::size_t> labels);

std::string cohorts_to_json(const CohortPartition& partition);
/// Checks the embedded corpus and graph hashes before anything else.
CohortPartition cohorts_from_json(std::string_view json, const Corpus& corpus,
                                  const SimilarityGraph& graph);

}  // namespace demosel

#endif  // DEMOSEL_COHORTS_HPP_
