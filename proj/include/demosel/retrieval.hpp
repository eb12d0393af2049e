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

// Query-to-cohort retrieval and anchor initialization of the search frontier.

#ifndef DEMOSEL_RETRIEVAL_HPP_
#define DEMOSEL_RETRIEVAL_HPP_

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "demosel/cohorts.hpp"
#include "demosel/core.hpp"

namespace demosel {

enum class FrontierOrigin { kAnchor, kExpansion };

/// Candidate set for the search. Members are kept ordered by node id.
class Frontier {
 public:
  /// Inserts unless the node is already present or excluded. Returns true if
  /// the node was added.
  bool add(NodeId v, FrontierOrigin origin);
  /// Removes a node and bars it from re-entering.
  void exclude(NodeId v);

  bool contains(NodeId v) const { return members_.count(v) != 0; }
  bool is_excluded(NodeId v) const { return excluded_.count(v) != 0; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  const std::set<NodeId>& members() const { return members_; }
  const std::set<NodeId>& excluded() const { return excluded_; }
  /// Provenance of every node that ever entered, including excluded ones.
  const std::map<NodeId, FrontierOrigin>& origin() const { return origin_; }

 private:
  std::set<NodeId> members_;
  std::set<NodeId> excluded_;
  std::map<NodeId, FrontierOrigin> origin_;
};

/// Top-`k_c` cohorts by cosine similarity between the query and each
/// prototype (ties by ascending cohort id).
std::vector<CohortId> retrieve_cohorts(const Query& query, const CohortPartition& partition,
                                       std::size_t k_c);

/// Per retrieved cohort, its `k_a` members closest to the query; the frontier
/// is the union. Cohorts smaller than `k_a` contribute every member.
Frontier init_anchors(const Query& query, const CohortPartition& partition,
                      const std::vector<CohortId>& retrieved, std::size_t k_a,
                      const Corpus& corpus);

/// Cohort-free bypass: the `count` globally nearest records become anchors.
Frontier init_global_anchors(const Query& query, const Corpus& corpus, std::size_t count);

/// Ids of `candidates` ranked by similarity to `target` (descending, ties by
/// ascending id), truncated to `k`.
std::vector<NodeId> top_k_by_similarity(const Vector& target, const Corpus& corpus,
                                        const std::vector<NodeId>& candidates, std::size_t k);

}  // namespace demosel

#endif  // DEMOSEL_RETRIEVAL_HPP_
