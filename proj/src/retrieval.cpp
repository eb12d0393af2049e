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

#include "demosel/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "demosel/error.hpp"

namespace demosel {

namespace {

struct Ranked {
  double sim;
  std::size_t id;
};

bool ranks_before(const Ranked& a, const Ranked& b) {
  if (a.sim != b.sim) return a.sim > b.sim;
  return a.id < b.id;
}

void check_dim(const Query& query, std::size_t dim) {
  if (static_cast<std::size_t>(query.embedding.size()) != dim) {
    throw InputError("query '" + query.id + "' has dimension " +
                     std::to_string(query.embedding.size()) + ", expected " + std::to_string(dim));
  }
}

}  // namespace

bool Frontier::add(NodeId v, FrontierOrigin origin) {
  if (excluded_.count(v) != 0) return false;
  if (!members_.insert(v).second) return false;
  origin_.emplace(v, origin);
  return true;
}

void Frontier::exclude(NodeId v) {
  members_.erase(v);
  excluded_.insert(v);
}

std::vector<NodeId> top_k_by_similarity(const Vector& target, const Corpus& corpus,
                                        const std::vector<NodeId>& candidates, std::size_t k) {
  std::vector<Ranked> ranked;
  ranked.reserve(candidates.size());
  for (NodeId v : candidates) ranked.push_back({cosine_sim(target, corpus[v].embedding), v});
  k = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    ranks_before);
  std::vector<NodeId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].id);
  return out;
}

std::vector<CohortId> retrieve_cohorts(const Query& query, const CohortPartition& partition,
                                       std::size_t k_c) {
  if (partition.prototypes.size() != partition.cohorts.size()) {
    throw InvariantViolation("partition prototypes are missing; call attach_prototypes first");
  }
  std::vector<Ranked> ranked;
  ranked.reserve(partition.prototypes.size());
  for (CohortId c = 0; c < partition.prototypes.size(); ++c) {
    check_dim(query, static_cast<std::size_t>(partition.prototypes[c].size()));
    ranked.push_back({cosine_sim(query.embedding, partition.prototypes[c]), c});
  }
  const std::size_t k = std::min(k_c, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    ranks_before);
  std::vector<CohortId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].id);
  return out;
}

Frontier init_anchors(const Query& query, const CohortPartition& partition,
                      const std::vector<CohortId>& retrieved, std::size_t k_a,
                      const Corpus& corpus) {
  check_dim(query, corpus.dim());
  Frontier frontier;
  for (CohortId c : retrieved) {
    if (c >= partition.cohorts.size()) {
      throw InputError("retrieved cohort " + std::to_string(c) + " is not in the partition");
    }
    for (NodeId v : top_k_by_similarity(query.embedding, corpus, partition.cohorts[c], k_a)) {
      frontier.add(v, FrontierOrigin::kAnchor);
    }
  }
  return frontier;
}

Frontier init_global_anchors(const Query& query, const Corpus& corpus, std::size_t count) {
  check_dim(query, corpus.dim());
  std::vector<NodeId> all(corpus.size());
  std::iota(all.begin(), all.end(), 0);
  Frontier frontier;
  for (NodeId v : top_k_by_similarity(query.embedding, corpus, all, count)) {
    frontier.add(v, FrontierOrigin::kAnchor);
  }
  return frontier;
}

}  // namespace demosel
