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

#include <cmath>
#include <map>

#include "brute.hpp"
#include "demosel/error.hpp"
#include "demosel/simgraph.hpp"
#include "demosel/synthetic.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace demosel;

namespace {

std::set<std::pair<NodeId, NodeId>> edge_set(const SimilarityGraph& g) {
  std::set<std::pair<NodeId, NodeId>> out;
  for (auto [i, j] : g.edges()) out.emplace(i, j);
  return out;
}

std::set<std::pair<NodeId, NodeId>> directed_set(const SimilarityGraph& g) {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const auto& e : g.directed_edges()) out.emplace(e.from, e.to);
  return out;
}

}  // namespace

TEST_CASE("three vectors at 0, 10 and 90 degrees") {
  const double r = 10.0 * M_PI / 180.0;
  const Corpus c = fixtures::make_corpus({{1, 0}, {std::cos(r), std::sin(r)}, {0, 1}});
  const auto g = build_knn_graph(c, 1);
  CHECK(directed_set(g) == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {1, 0}, {2, 1}});
  CHECK(edge_set(g) == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
  CHECK(g.edge_count() == 2);
}

TEST_CASE("two identical vectors") {
  const auto g = build_knn_graph(fixtures::make_corpus({{1, 2}, {1, 2}}), 1);
  CHECK(g.edge_count() == 1);
  CHECK(g.degrees() == std::vector<std::size_t>{1, 1});
}

TEST_CASE("k_g at or above N is clamped with a warning") {
  const auto g = build_knn_graph(fixtures::make_corpus({{1, 0}, {0, 1}, {1, 1}}), 5);
  CHECK(g.k_g() == 2);
  CHECK(g.k_g_requested() == 5);
  CHECK_FALSE(g.warnings().empty());
  CHECK(g.edge_count() == 3);
}

TEST_CASE("zero vectors are counted as degenerate") {
  const auto g = build_knn_graph(fixtures::make_corpus({{0, 0}, {1, 0}, {0, 1}}), 1);
  CHECK(g.degenerate_nodes() == 1);
}

TEST_CASE("path graph neighbours and invalid ids") {
  const std::vector<Edge> edges{{0, 1}, {1, 2}};
  const auto g = SimilarityGraph::from_edges(4, edges);
  const auto nb = g.neighbors(1);
  CHECK(std::vector<NodeId>(nb.begin(), nb.end()) == std::vector<NodeId>{0, 2});
  CHECK(g.neighbors(3).empty());
  CHECK_THROWS_AS(g.neighbors(4), InvalidNodeError);
}

TEST_CASE("synthetic corpus at the default k_g has out-degree exactly 8") {
  SyntheticSpec spec;
  spec.n_cohorts = 40;
  spec.cohort_size = 25;
  const auto data = generate_synthetic(spec);
  const auto g = build_knn_graph(data.corpus, 8);
  std::vector<int> out(1000, 0);
  for (const auto& e : g.directed_edges()) ++out[e.from];
  CHECK(std::all_of(out.begin(), out.end(), [](int d) { return d == 8; }));
  std::size_t sum = 0;
  for (auto d : g.degrees()) sum += d;
  CHECK(sum == 2 * g.edge_count());
}

TEST_CASE("kNN graph equals the brute-force ranking") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t n = 50 + 40 * seed;
    const auto vs = fixtures::random_vectors(n, 5, seed);
    const Corpus c = fixtures::make_corpus(vs);
    for (std::size_t k : {1, 3, 8}) {
      const auto g = build_knn_graph(c, k, 2);
      const auto ref = brute::knn(vs, k);
      CHECK(directed_set(g) == ref.directed);
      CHECK(edge_set(g) == ref.undirected);
      for (NodeId v = 0; v < n; ++v) {
        for (NodeId u : g.neighbors(v)) CHECK(g.has_edge(u, v));
        CHECK(g.neighbors(v).size() == g.degree(v));
      }
      // Neighbour lists: descending similarity, then id.
      for (NodeId v = 0; v < n; v += 7) {
        const auto nb = g.neighbors(v);
        for (std::size_t t = 1; t < nb.size(); ++t) {
          const double a = brute::cosine(vs[v], vs[nb[t - 1]]);
          const double b = brute::cosine(vs[v], vs[nb[t]]);
          CHECK((a > b || (a == b && nb[t - 1] < nb[t])));
        }
      }
    }
  }
}

TEST_CASE("graph JSON round trip, determinism and hash check") {
  const auto vs = fixtures::random_vectors(60, 4, 3);
  const Corpus c = fixtures::make_corpus(vs);
  const auto g = build_knn_graph(c, 4);
  const std::string text = graph_to_json(g);
  CHECK(graph_to_json(build_knn_graph(c, 4, 1)) == text);
  const auto back = graph_from_json(text, c);
  CHECK(back.edges() == g.edges());
  CHECK(back.degrees() == g.degrees());
  CHECK(back.content_hash() == g.content_hash());
  for (NodeId v = 0; v < 60; ++v) {
    const auto a = g.neighbors(v), b = back.neighbors(v);
    CHECK(std::vector<NodeId>(a.begin(), a.end()) == std::vector<NodeId>(b.begin(), b.end()));
  }
  const Corpus other = fixtures::make_corpus(fixtures::random_vectors(60, 4, 4));
  CHECK_THROWS_AS(graph_from_json(text, other), ConfigError);
}
