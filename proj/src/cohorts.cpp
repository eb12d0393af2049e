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

#include "demosel/cohorts.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "demosel/error.hpp"
#include "json.hpp"

namespace demosel {

std::string_view to_string(CommunityMethod method) {
  return method == CommunityMethod::kLeiden ? "leiden" : "louvain";
}

CommunityMethod parse_community_method(std::string_view name) {
  if (name == "leiden") return CommunityMethod::kLeiden;
  if (name == "louvain") return CommunityMethod::kLouvain;
  throw ConfigError("unknown community method '" + std::string(name) + "'");
}

double modularity(const SimilarityGraph& graph, std::span<const CohortId> assignment,
                  double resolution) {
  const std::size_t n = graph.size();
  if (assignment.size() != n) {
    throw InputError("assignment covers " + std::to_string(assignment.size()) + " nodes, graph has " +
                     std::to_string(n));
  }
  const double two_m = 2.0 * static_cast<double>(graph.edge_count());
  if (two_m == 0.0) throw UndefinedModularityError("modularity is undefined on a graph without edges");

  // Per community: internal endpoint count (2x internal edges) and degree sum.
  std::unordered_map<CohortId, double> internal, degree_sum;
  for (NodeId i = 0; i < n; ++i) {
    degree_sum[assignment[i]] += static_cast<double>(graph.degree(i));
    for (NodeId j : graph.neighbors(i)) {
      if (assignment[j] == assignment[i]) internal[assignment[i]] += 1.0;
    }
  }
  std::vector<CohortId> keys;
  for (const auto& [c, _] : degree_sum) keys.push_back(c);
  std::sort(keys.begin(), keys.end());
  double q = 0.0;
  for (CohortId c : keys) {
    const double d = degree_sum[c];
    q += internal[c] / two_m - resolution * (d / two_m) * (d / two_m);
  }
  return q;
}

namespace {

// Weighted multigraph used across aggregation levels. Self-loop weight counts
// each collapsed undirected edge once; degree = 2*self + Σ incident weights.
struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::vector<double> self;
  std::vector<double> degree;
  double total = 0.0;  // 2m

  std::size_t size() const { return adj.size(); }
};

WeightedGraph from_similarity(const SimilarityGraph& graph) {
  WeightedGraph g;
  const std::size_t n = graph.size();
  g.adj.resize(n);
  g.self.assign(n, 0.0);
  g.degree.assign(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    auto nb = graph.neighbors(i);
    std::vector<NodeId> sorted(nb.begin(), nb.end());
    std::sort(sorted.begin(), sorted.end());
    for (NodeId j : sorted) g.adj[i].emplace_back(j, 1.0);
    g.degree[i] = static_cast<double>(sorted.size());
    g.total += g.degree[i];
  }
  return g;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::size_t>& membership,
                        std::size_t count) {
  WeightedGraph out;
  out.adj.resize(count);
  out.self.assign(count, 0.0);
  out.degree.assign(count, 0.0);
  out.total = g.total;
  std::vector<std::unordered_map<std::size_t, double>> acc(count);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::size_t cv = membership[v];
    out.self[cv] += g.self[v];
    out.degree[cv] += g.degree[v];
    for (const auto& [u, w] : g.adj[v]) {
      const std::size_t cu = membership[u];
      if (cu == cv) {
        out.self[cv] += 0.5 * w;  // seen once from each endpoint
      } else {
        acc[cv][cu] += w;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    out.adj[c].assign(acc[c].begin(), acc[c].end());
    std::sort(out.adj[c].begin(), out.adj[c].end());
  }
  return out;
}

// Renumbers labels to 0..k-1 in order of first appearance; returns k.
std::size_t renumber(std::vector<std::size_t>& labels) {
  std::unordered_map<std::size_t, std::size_t> remap;
  for (auto& l : labels) {
    auto [it, inserted] = remap.emplace(l, remap.size());
    l = it->second;
  }
  return remap.size();
}

// Scratch buffer for per-community edge weights around one node.
class NeighborWeights {
 public:
  explicit NeighborWeights(std::size_t n) : weight_(n, 0.0), seen_(n, false) {}

  void add(std::size_t c, double w) {
    if (!seen_[c]) {
      seen_[c] = true;
      touched_.push_back(c);
    }
    weight_[c] += w;
  }
  double operator[](std::size_t c) const { return weight_[c]; }
  const std::vector<std::size_t>& touched() const { return touched_; }
  void clear() {
    for (std::size_t c : touched_) {
      weight_[c] = 0.0;
      seen_[c] = false;
    }
    touched_.clear();
  }

 private:
  std::vector<double> weight_;
  std::vector<bool> seen_;
  std::vector<std::size_t> touched_;
};

// Sweeps nodes in `order`, moving each to the neighbouring community with the
// largest strictly positive modularity gain. Ties keep the current community.
// Returns true if any node moved.
bool move_nodes(const WeightedGraph& g, std::vector<std::size_t>& comm, double gamma,
                const std::vector<std::size_t>& order, double tolerance) {
  const std::size_t n = g.size();
  std::vector<double> tot(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    tot[comm[v]] += g.degree[v];
    ++members[comm[v]];
  }
  std::vector<std::size_t> empty;
  for (std::size_t c = n; c-- > 0;) {
    if (members[c] == 0) empty.push_back(c);
  }

  NeighborWeights to(n);
  bool any_moved = false;
  for (;;) {
    double improvement = 0.0;
    for (std::size_t v : order) {
      const std::size_t old = comm[v];
      const double kv = g.degree[v];
      to.clear();
      for (const auto& [u, w] : g.adj[v]) to.add(comm[u], w);

      tot[old] -= kv;
      --members[old];
      auto gain = [&](std::size_t c) { return to[c] - gamma * kv * tot[c] / g.total; };
      std::size_t best = old;
      const double stay = gain(old);
      double best_gain = stay;
      for (std::size_t c : to.touched()) {
        if (c == old) continue;
        const double gc = gain(c);
        if (gc > best_gain) {
          best_gain = gc;
          best = c;
        }
      }
      // Leaving for an empty community is worth 0.
      if (members[old] > 0 && best_gain < 0.0 && !empty.empty()) {
        best = empty.back();
        best_gain = 0.0;
      }
      if (best != old && best_gain - stay <= 1e-14 * std::max(1.0, std::abs(stay))) {
        best = old;
        best_gain = stay;
      }
      if (best != old) {
        if (members[best] == 0) empty.pop_back();
        improvement += 2.0 * (best_gain - stay) / g.total;
        any_moved = true;
      }
      tot[best] += kv;
      ++members[best];
      comm[v] = best;
      if (members[old] == 0 && best != old) empty.push_back(old);
    }
    if (improvement < tolerance) break;
  }
  return any_moved;
}

// Leiden refinement: inside each community, singletons merge greedily into
// well-connected refined sub-communities they share an edge with. Every
// refined community is therefore connected.
std::vector<std::size_t> refine(const WeightedGraph& g, const std::vector<std::size_t>& comm,
                                double gamma, const std::vector<std::size_t>& order) {
  const std::size_t n = g.size();
  std::vector<std::size_t> refined(n);
  std::iota(refined.begin(), refined.end(), 0);
  std::vector<double> ref_degree = g.degree;
  std::vector<double> ref_external(n, 0.0);  // weight to the rest of the parent community
  std::vector<std::size_t> ref_size(n, 1);
  std::vector<double> parent_degree(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    parent_degree[comm[v]] += g.degree[v];
    for (const auto& [u, w] : g.adj[v]) {
      if (comm[u] == comm[v]) ref_external[v] += w;
    }
  }

  NeighborWeights to(n);
  for (std::size_t v : order) {
    if (ref_size[refined[v]] != 1) continue;
    const std::size_t parent = comm[v];
    const double kv = g.degree[v];
    const double ks = parent_degree[parent];
    if (ref_external[refined[v]] < gamma * kv * (ks - kv) / g.total) continue;

    to.clear();
    for (const auto& [u, w] : g.adj[v]) {
      if (comm[u] == parent) to.add(refined[u], w);
    }
    const std::size_t self = refined[v];
    std::size_t best = self;
    double best_gain = 0.0;
    for (std::size_t c : to.touched()) {
      if (c == self) continue;
      if (ref_external[c] < gamma * ref_degree[c] * (ks - ref_degree[c]) / g.total) continue;
      const double gc = to[c] - gamma * kv * ref_degree[c] / g.total;
      if (gc > best_gain) {
        best_gain = gc;
        best = c;
      }
    }
    if (best == self) continue;
    ref_external[best] = ref_external[best] + ref_external[self] - 2.0 * to[best];
    ref_degree[best] += kv;
    ++ref_size[best];
    ref_size[self] = 0;
    refined[v] = best;
  }
  return refined;
}

// Splits any community whose induced subgraph is disconnected. Splitting
// never lowers modularity since no edges cross between components.
void split_disconnected(const SimilarityGraph& graph, std::vector<std::size_t>& labels) {
  const std::size_t n = graph.size();
  std::vector<std::size_t> out(n, n);
  std::size_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (out[s] != n) continue;
    out[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId u : graph.neighbors(v)) {
        if (out[u] == n && labels[u] == labels[s]) {
          out[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  labels = std::move(out);
}

double safe_modularity(const SimilarityGraph& graph, const std::vector<std::size_t>& labels,
                       double gamma) {
  return graph.edge_count() == 0 ? 0.0 : modularity(graph, labels, gamma);
}

struct RunResult {
  std::vector<std::size_t> labels;
  std::vector<double> history;
  double q = 0.0;
};

RunResult run_once(const SimilarityGraph& graph, const CohortOptions& opt, std::uint64_t seed) {
  const std::size_t n = graph.size();
  std::mt19937_64 rng(seed);
  WeightedGraph g = from_similarity(graph);
  std::vector<std::size_t> membership(n);  // original node -> aggregate node
  std::iota(membership.begin(), membership.end(), 0);
  std::vector<std::size_t> comm(n);
  std::iota(comm.begin(), comm.end(), 0);

  RunResult result;
  std::vector<std::size_t> flat(n);
  for (int level = 0; level < opt.max_levels; ++level) {
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    move_nodes(g, comm, opt.resolution, order, opt.tolerance);
    const std::size_t n_comm = renumber(comm);
    for (NodeId v = 0; v < n; ++v) flat[v] = comm[membership[v]];
    result.history.push_back(safe_modularity(graph, flat, opt.resolution));
    if (n_comm == g.size()) break;

    std::vector<std::size_t> agg_of = comm;  // aggregate-node grouping
    std::size_t n_agg = n_comm;
    std::vector<std::size_t> next_comm;
    if (opt.method == CommunityMethod::kLeiden) {
      std::vector<std::size_t> refined = refine(g, comm, opt.resolution, order);
      const std::size_t n_ref = renumber(refined);
      if (n_ref < g.size()) {
        agg_of = refined;
        n_agg = n_ref;
      }
      // Aggregate nodes start in their parent community.
      next_comm.assign(n_agg, 0);
      for (std::size_t v = 0; v < g.size(); ++v) next_comm[agg_of[v]] = comm[v];
    } else {
      next_comm.resize(n_agg);
      std::iota(next_comm.begin(), next_comm.end(), 0);
    }
    g = aggregate(g, agg_of, n_agg);
    for (NodeId v = 0; v < n; ++v) membership[v] = agg_of[membership[v]];
    comm = std::move(next_comm);
  }

  for (NodeId v = 0; v < n; ++v) flat[v] = comm[membership[v]];
  if (opt.method == CommunityMethod::kLeiden) {
    split_disconnected(graph, flat);
    const double q = safe_modularity(graph, flat, opt.resolution);
    if (result.history.empty() || q != result.history.back()) result.history.push_back(q);
  }
  result.labels = std::move(flat);
  result.q = result.history.empty() ? 0.0 : result.history.back();
  return result;
}

}  // namespace

CohortPartition partition_from_assignment(std::span<const std::size_t> labels) {
  // Number cohorts by smallest member.
  std::unordered_map<std::size_t, CohortId> remap;
  CohortPartition p;
  p.assignment.resize(labels.size());
  for (NodeId v = 0; v < labels.size(); ++v) {
    auto [it, inserted] = remap.emplace(labels[v], remap.size());
    if (inserted) p.cohorts.emplace_back();
    p.assignment[v] = it->second;
    p.cohorts[it->second].push_back(v);
  }
  return p;
}

CohortPartition discover_cohorts(const SimilarityGraph& graph, const CohortOptions& options) {
  if (graph.size() == 0) throw InputError("cannot partition an empty graph");
  if (!(options.resolution > 0.0)) throw ConfigError("resolution must be positive");
  if (options.restarts < 1) throw ConfigError("restarts must be at least 1");

  RunResult best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    // splitmix-style spread so neighbouring seeds give unrelated streams
    const std::uint64_t seed = options.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r);
    RunResult run = run_once(graph, options, seed);
    if (!have || run.q > best.q) {
      best = std::move(run);
      have = true;
    }
  }

  CohortPartition p = partition_from_assignment(best.labels);
  p.modularity = best.q;
  p.level_modularity = std::move(best.history);
  p.method = options.method;
  p.resolution = options.resolution;
  p.seed = options.seed;
  p.corpus_hash = graph.corpus_hash();
  p.graph_hash = graph.content_hash();
  return p;
}

std::vector<Vector> prototypes(const std::vector<std::vector<NodeId>>& cohorts,
                               const Corpus& corpus) {
  std::vector<Vector> out;
  out.reserve(cohorts.size());
  for (const auto& members : cohorts) {
    if (members.empty()) throw InvariantViolation("empty cohort");
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(corpus.dim()));
    for (NodeId i : members) {
      if (i >= corpus.size()) throw InvalidNodeError("cohort member outside corpus");
      sum += corpus[i].embedding;
    }
    out.push_back(sum / static_cast<double>(members.size()));
  }
  return out;
}

void attach_prototypes(CohortPartition& partition, const Corpus& corpus) {
  if (partition.assignment.size() != corpus.size()) {
    throw ConfigError("partition covers " + std::to_string(partition.assignment.size()) +
                      " nodes but corpus has " + std::to_string(corpus.size()));
  }
  partition.prototypes = prototypes(partition.cohorts, corpus);
}

bool cohorts_connected(const SimilarityGraph& graph, const CohortPartition& partition) {
  std::vector<bool> seen(graph.size(), false);
  for (const auto& members : partition.cohorts) {
    if (members.empty()) return false;
    std::vector<NodeId> stack{members.front()};
    seen[members.front()] = true;
    std::size_t reached = 1;
    const CohortId c = partition.assignment[members.front()];
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId u : graph.neighbors(v)) {
        if (!seen[u] && partition.assignment[u] == c) {
          seen[u] = true;
          ++reached;
          stack.push_back(u);
        }
      }
    }
    if (reached != members.size()) return false;
  }
  return true;
}

std::string cohorts_to_json(const CohortPartition& partition) {
  nlohmann::ordered_json j;
  j["method"] = to_string(partition.method);
  j["resolution"] = partition.resolution;
  j["seed"] = partition.seed;
  j["modularity"] = partition.modularity;
  j["corpus_hash"] = partition.corpus_hash;
  j["graph_hash"] = partition.graph_hash;
  j["level_modularity"] = partition.level_modularity;
  auto cohorts = nlohmann::ordered_json::array();
  for (CohortId c = 0; c < partition.cohorts.size(); ++c) {
    nlohmann::ordered_json entry;
    entry["id"] = c;
    entry["members"] = partition.cohorts[c];
    auto proto = nlohmann::ordered_json::array();
    if (c < partition.prototypes.size()) {
      for (Eigen::Index k = 0; k < partition.prototypes[c].size(); ++k) {
        proto.push_back(partition.prototypes[c][k]);
      }
    }
    entry["prototype"] = std::move(proto);
    cohorts.push_back(std::move(entry));
  }
  j["cohorts"] = std::move(cohorts);
  return j.dump() + "\n";
}

CohortPartition cohorts_from_json(std::string_view text, const Corpus& corpus,
                                  const SimilarityGraph& graph) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("cohort file is not valid JSON: ") + e.what());
  }
  if (j.contains("corpus_hash") && j["corpus_hash"].get<std::string>() != corpus.content_hash()) {
    throw ConfigError("cohort file was built from a different corpus");
  }
  if (j.contains("graph_hash") && j["graph_hash"].get<std::string>() != graph.content_hash()) {
    throw ConfigError("cohort file was built from a different graph");
  }
  if (!j.contains("cohorts")) throw InputError("cohort file has no 'cohorts'");

  const std::size_t n = corpus.size();
  std::vector<std::size_t> labels(n, n);
  for (const auto& entry : j["cohorts"]) {
    const auto id = entry.at("id").get<std::size_t>();
    for (const auto& m : entry.at("members")) {
      const auto v = m.get<NodeId>();
      if (v >= n) throw InvalidNodeError("cohort member " + std::to_string(v) + " outside corpus");
      if (labels[v] != n) throw InputError("node " + std::to_string(v) + " is in two cohorts");
      labels[v] = id;
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (labels[v] == n) throw InputError("node " + std::to_string(v) + " is in no cohort");
  }
  CohortPartition p = partition_from_assignment(labels);
  p.method = parse_community_method(j.value("method", std::string("leiden")));
  p.resolution = j.value("resolution", 1.0);
  p.seed = j.value("seed", std::uint64_t{0});
  p.modularity = j.value("modularity", 0.0);
  p.corpus_hash = corpus.content_hash();
  p.graph_hash = graph.content_hash();
  if (j.contains("level_modularity")) p.level_modularity = j["level_modularity"].get<std::vector<double>>();
  attach_prototypes(p, corpus);
  return p;
}

}  // namespace demosel
