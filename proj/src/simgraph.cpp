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

#include "demosel/simgraph.hpp"

#include <algorithm>
#include <thread>

#include "demosel/error.hpp"
#include "demosel/hash.hpp"
#include "json.hpp"

namespace demosel {

namespace {

struct Scored {
  double sim;
  NodeId id;
};

// Descending similarity, ascending id.
bool ranks_before(const Scored& a, const Scored& b) {
  if (a.sim != b.sim) return a.sim > b.sim;
  return a.id < b.id;
}

}  // namespace

std::span<const NodeId> SimilarityGraph::neighbors(NodeId v) const {
  if (v >= adjacency_.size()) {
    throw InvalidNodeError("node " + std::to_string(v) + " out of range (n=" +
                           std::to_string(adjacency_.size()) + ")");
  }
  return adjacency_[v];
}

bool SimilarityGraph::has_edge(NodeId a, NodeId b) const {
  const auto nb = neighbors(a);
  return std::find(nb.begin(), nb.end(), b) != nb.end();
}

std::vector<Edge> SimilarityGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < adjacency_.size(); ++i) {
    for (NodeId j : adjacency_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string SimilarityGraph::content_hash() const {
  ContentHasher h;
  h.add(static_cast<std::uint64_t>(size()));
  for (const auto& [i, j] : edges()) h.add(static_cast<std::uint64_t>(i)).add(static_cast<std::uint64_t>(j));
  return h.hex();
}

void SimilarityGraph::finalize(const Corpus* corpus) {
  edge_count_ = 0;
  degrees_.assign(adjacency_.size(), 0);
  for (NodeId i = 0; i < adjacency_.size(); ++i) {
    auto& nb = adjacency_[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    nb.erase(std::remove(nb.begin(), nb.end(), i), nb.end());
    if (corpus != nullptr) {
      const Vector& hi = (*corpus)[i].embedding;
      std::vector<Scored> scored;
      scored.reserve(nb.size());
      for (NodeId j : nb) scored.push_back({cosine_sim(hi, (*corpus)[j].embedding), j});
      std::sort(scored.begin(), scored.end(), ranks_before);
      for (std::size_t k = 0; k < nb.size(); ++k) nb[k] = scored[k].id;
    }
    degrees_[i] = nb.size();
    edge_count_ += nb.size();
  }
  edge_count_ /= 2;
}

SimilarityGraph SimilarityGraph::from_edges(std::size_t n, std::span<const Edge> edges,
                                            const Corpus* corpus) {
  if (corpus != nullptr && corpus->size() != n) {
    throw ConfigError("graph node count " + std::to_string(n) + " does not match corpus size " +
                      std::to_string(corpus->size()));
  }
  SimilarityGraph g;
  g.adjacency_.resize(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw InvalidNodeError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") references a node outside [0," + std::to_string(n) + ")");
    }
    if (a == b) continue;
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  if (corpus != nullptr) g.corpus_hash_ = corpus->content_hash();
  g.finalize(corpus);
  return g;
}

SimilarityGraph build_knn_graph(const Corpus& corpus, std::size_t k_g, unsigned threads) {
  const std::size_t n = corpus.size();
  if (n < 2) throw InputError("kNN graph needs at least 2 records, got " + std::to_string(n));
  if (k_g < 1) throw InputError("k_g must be positive");

  SimilarityGraph g;
  g.k_g_requested_ = k_g;
  if (k_g >= n) {
    g.warnings_.push_back("k_g=" + std::to_string(k_g) + " >= N=" + std::to_string(n) +
                          "; clamped to " + std::to_string(n - 1));
    k_g = n - 1;
  }
  g.k_g_ = k_g;
  g.corpus_hash_ = corpus.content_hash();

  std::vector<double> norms(n);
  for (NodeId i = 0; i < n; ++i) {
    norms[i] = corpus[i].embedding.norm();
    if (norms[i] == 0.0) ++g.degenerate_nodes_;
  }
  if (g.degenerate_nodes_ > 0) {
    g.warnings_.push_back(std::to_string(g.degenerate_nodes_) +
                          " record(s) have zero-norm embeddings; their similarities are 0");
  }

  // Row i's top-k is independent of every other row.
  std::vector<std::vector<Scored>> top(n);
  auto work = [&](NodeId begin, NodeId end) {
    std::vector<Scored> row;
    row.reserve(n - 1);
    for (NodeId i = begin; i < end; ++i) {
      row.clear();
      const Vector& hi = corpus[i].embedding;
      for (NodeId j = 0; j < n; ++j) {
        if (j == i) continue;
        row.push_back({cosine_sim_prenormed(hi, norms[i], corpus[j].embedding, norms[j]), j});
      }
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k_g), row.end(),
                        ranks_before);
      top[i].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k_g));
    }
  };
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, (n + 63) / 64));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const NodeId begin = w * chunk;
      const NodeId end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  g.adjacency_.resize(n);
  g.directed_.reserve(n * k_g);
  for (NodeId i = 0; i < n; ++i) {
    for (const Scored& s : top[i]) {
      g.directed_.push_back({i, s.id, s.sim});
      g.adjacency_[i].push_back(s.id);
      g.adjacency_[s.id].push_back(i);
    }
  }
  g.finalize(&corpus);
  return g;
}

std::string graph_to_json(const SimilarityGraph& graph) {
  nlohmann::ordered_json j;
  j["n"] = graph.size();
  j["k_g"] = graph.k_g();
  j["corpus_hash"] = graph.corpus_hash();
  j["graph_hash"] = graph.content_hash();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  auto directed = nlohmann::ordered_json::array();
  for (const DirectedEdge& e : graph.directed_edges()) directed.push_back({e.from, e.to});
  j["directed_edges"] = std::move(directed);
  return j.dump() + "\n";
}

SimilarityGraph graph_from_json(std::string_view text, const Corpus& corpus) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("graph file is not valid JSON: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("edges")) {
    throw InputError("graph file must contain 'n' and 'edges'");
  }
  if (j.contains("corpus_hash") && j["corpus_hash"].get<std::string>() != corpus.content_hash()) {
    throw ConfigError("graph was built from a different corpus (hash " +
                      j["corpus_hash"].get<std::string>() + ", corpus is " +
                      corpus.content_hash() + ")");
  }
  const auto n = j["n"].get<std::size_t>();
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
  SimilarityGraph g = SimilarityGraph::from_edges(n, edges, &corpus);
  g.k_g_ = j.value("k_g", std::size_t{0});
  g.k_g_requested_ = g.k_g_;
  if (j.contains("directed_edges")) {
    for (const auto& e : j["directed_edges"]) {
      const auto a = e.at(0).get<NodeId>();
      const auto b = e.at(1).get<NodeId>();
      if (a >= n || b >= n) throw InvalidNodeError("directed edge outside node range");
      g.directed_.push_back({a, b, cosine_sim(corpus[a].embedding, corpus[b].embedding)});
    }
  }
  return g;
}

}  // namespace demosel
