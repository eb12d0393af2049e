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

// Symmetrized k-nearest-neighbour similarity graph.

#ifndef DEMOSEL_SIMGRAPH_HPP_
#define DEMOSEL_SIMGRAPH_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "demosel/core.hpp"

namespace demosel {

struct DirectedEdge {
  NodeId from = 0;
  NodeId to = 0;
  double similarity = 0.0;
};

using Edge = std::pair<NodeId, NodeId>;

/// Undirected, unweighted graph over corpus indices. Similarities are kept
/// only to order neighbour lists and for audit.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;

  /// Builds from undirected edges. Self-loops and duplicates are dropped.
  /// When `corpus` is given, neighbour lists are ordered by descending cosine
  /// similarity (ties by id); otherwise by id.
  static SimilarityGraph from_edges(std::size_t n, std::span<const Edge> edges,
                                    const Corpus* corpus = nullptr);

  std::size_t size() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  const std::vector<std::size_t>& degrees() const { return degrees_; }
  bool has_edge(NodeId a, NodeId b) const;

  /// Undirected edges (i < j), lexicographically sorted.
  std::vector<Edge> edges() const;

  const std::vector<DirectedEdge>& directed_edges() const { return directed_; }
  std::size_t k_g() const { return k_g_; }
  std::size_t k_g_requested() const { return k_g_requested_; }
  const std::string& corpus_hash() const { return corpus_hash_; }
  std::string content_hash() const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Records whose embedding had zero norm (similarity defined as 0).
  std::size_t degenerate_nodes() const { return degenerate_nodes_; }

 private:
  friend SimilarityGraph build_knn_graph(const Corpus&, std::size_t, unsigned);
  friend SimilarityGraph graph_from_json(std::string_view, const Corpus&);

  void finalize(const Corpus* corpus);

  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::size_t> degrees_;
  std::size_t edge_count_ = 0;
  std::vector<DirectedEdge> directed_;
  std::size_t k_g_ = 0;
  std::size_t k_g_requested_ = 0;
  std::string corpus_hash_;
  std::vector<std::string> warnings_;
  std::size_t degenerate_nodes_ = 0;
};

/// Top-`k_g` neighbours of every record by cosine similarity (ties by
/// ascending id), union-symmetrized. `k_g >= N` is clamped to N-1 with a
/// warning. Rows are processed on `threads` workers (0 = hardware default).
SimilarityGraph build_knn_graph(const Corpus& corpus, std::size_t k_g, unsigned threads = 0);

/// Graph file: {"n", "k_g", "edges": [[i,j]...], ...}. The loader re-derives
/// adjacency and degrees and checks the corpus hash.
std::string graph_to_json(const SimilarityGraph& graph);
SimilarityGraph graph_from_json(std::string_view json, const Corpus& corpus);

}  // namespace demosel

#endif  // DEMOSEL_SIMGRAPH_HPP_
