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

#include "demosel/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "demosel/error.hpp"
#include "json.hpp"

namespace demosel {

namespace {

std::string record_text_for(const Vector& v) {
  std::string out;
  char buf[48];
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%sf%ld=%.4f", k == 0 ? "" : "; ", static_cast<long>(k), v[k]);
    out += buf;
  }
  return out;
}

// Random subset of [lo, lo+count) of the given size, ascending.
std::vector<int> sample_range(std::mt19937_64& rng, int lo, std::size_t count, std::size_t size) {
  std::vector<int> all(count);
  std::iota(all.begin(), all.end(), lo);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(size, count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_cohorts == 0 || spec.cohort_size == 0 || spec.dim == 0) {
    throw ConfigError("synthetic spec needs positive n_cohorts, cohort_size and dim");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(spec.dim);

  std::vector<Vector> centers;
  for (std::size_t m = 0; m < spec.n_cohorts; ++m) {
    Vector c(d);
    for (Eigen::Index k = 0; k < d; ++k) c[k] = normal(rng);
    centers.push_back(c.normalized() * spec.inter_separation);
  }
  auto draw = [&](std::size_t m) {
    Vector v(d);
    for (Eigen::Index k = 0; k < d; ++k) v[k] = centers[m][k] + spec.intra_spread * normal(rng);
    return v;
  };
  auto draw_label = [&](std::size_t m) -> std::int64_t {
    const std::int64_t planted = static_cast<std::int64_t>(m % 2);
    return unit(rng) < spec.label_noise ? 1 - planted : planted;
  };

  // Each cohort owns a disjoint block of feature ids:
  //   [core | chunk_0 .. chunk_{c-1} | unique ids of its records]
  const std::size_t unique_span = spec.cohort_size * spec.max_unique;
  const std::size_t block =
      spec.core_size + spec.chunks_per_cohort * spec.chunk_size + unique_span;
  const auto core_cover = static_cast<std::size_t>(
      std::llround(spec.redundancy * static_cast<double>(spec.core_size)));

  SyntheticData out;
  std::vector<InstanceRecord> records;
  for (std::size_t m = 0; m < spec.n_cohorts; ++m) {
    const int base = static_cast<int>(m * block);
    for (std::size_t r = 0; r < spec.cohort_size; ++r) {
      InstanceRecord rec;
      rec.id = std::to_string(records.size());
      rec.embedding = draw(m);
      rec.label = draw_label(m);
      rec.record_text = record_text_for(rec.embedding);
      std::vector<int> features;
      if (unit(rng) < spec.redundant_fraction) {
        features = sample_range(rng, base, spec.core_size, core_cover);
        const std::size_t unique =
            spec.max_unique == 0 ? 0 : static_cast<std::size_t>(rng() % (spec.max_unique + 1));
        const int ubase = base + static_cast<int>(spec.core_size + spec.chunks_per_cohort * spec.chunk_size +
                                                  r * spec.max_unique);
        for (std::size_t u = 0; u < unique; ++u) features.push_back(ubase + static_cast<int>(u));
      } else if (spec.chunks_per_cohort > 0) {
        const std::size_t chunk = static_cast<std::size_t>(rng() % spec.chunks_per_cohort);
        const int cbase = base + static_cast<int>(spec.core_size + chunk * spec.chunk_size);
        for (std::size_t u = 0; u < spec.chunk_size; ++u) features.push_back(cbase + static_cast<int>(u));
      }
      rec.features = std::move(features);
      records.push_back(std::move(rec));
      out.record_cohort.push_back(m);
    }
  }
  out.corpus = Corpus(std::move(records));

  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    const std::size_t m = static_cast<std::size_t>(rng() % spec.n_cohorts);
    Query query;
    query.id = "q" + std::to_string(q);
    query.embedding = draw(m);
    query.record_text = record_text_for(query.embedding);
    query.label = Label{draw_label(m)};
    std::vector<int> target(block);
    std::iota(target.begin(), target.end(), static_cast<int>(m * block));
    query.features = std::move(target);
    out.queries.push_back(std::move(query));
    out.query_cohort.push_back(m);
  }
  return out;
}

std::string spec_to_json(const SyntheticSpec& s) {
  nlohmann::ordered_json j;
  j["n_cohorts"] = s.n_cohorts;
  j["cohort_size"] = s.cohort_size;
  j["dim"] = s.dim;
  j["intra_spread"] = s.intra_spread;
  j["inter_separation"] = s.inter_separation;
  j["redundancy"] = s.redundancy;
  j["label_noise"] = s.label_noise;
  j["n_queries"] = s.n_queries;
  j["seed"] = s.seed;
  j["core_size"] = s.core_size;
  j["chunk_size"] = s.chunk_size;
  j["chunks_per_cohort"] = s.chunks_per_cohort;
  j["max_unique"] = s.max_unique;
  j["redundant_fraction"] = s.redundant_fraction;
  return j.dump(2) + "\n";
}

SyntheticSpec spec_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("spec is not valid JSON: ") + e.what());
  }
  SyntheticSpec s;
  s.n_cohorts = j.value("n_cohorts", s.n_cohorts);
  s.cohort_size = j.value("cohort_size", s.cohort_size);
  s.dim = j.value("dim", s.dim);
  s.intra_spread = j.value("intra_spread", s.intra_spread);
  s.inter_separation = j.value("inter_separation", s.inter_separation);
  s.redundancy = j.value("redundancy", s.redundancy);
  s.label_noise = j.value("label_noise", s.label_noise);
  s.n_queries = j.value("n_queries", s.n_queries);
  s.seed = j.value("seed", s.seed);
  s.core_size = j.value("core_size", s.core_size);
  s.chunk_size = j.value("chunk_size", s.chunk_size);
  s.chunks_per_cohort = j.value("chunks_per_cohort", s.chunks_per_cohort);
  s.max_unique = j.value("max_unique", s.max_unique);
  s.redundant_fraction = j.value("redundant_fraction", s.redundant_fraction);
  return s;
}

std::string synthetic_manifest_json(const SyntheticSpec& spec, const SyntheticData& data) {
  nlohmann::ordered_json j;
  j["spec"] = nlohmann::ordered_json::parse(spec_to_json(spec));
  j["corpus_hash"] = data.corpus.content_hash();
  auto records = nlohmann::ordered_json::array();
  for (NodeId i = 0; i < data.corpus.size(); ++i) {
    records.push_back({{"id", data.corpus[i].id}, {"cohort", data.record_cohort[i]}});
  }
  j["records"] = std::move(records);
  auto queries = nlohmann::ordered_json::array();
  for (std::size_t q = 0; q < data.queries.size(); ++q) {
    queries.push_back({{"id", data.queries[q].id}, {"cohort", data.query_cohort[q]}});
  }
  j["queries"] = std::move(queries);
  return j.dump(2) + "\n";
}

PlantedGraph planted_partition_graph(std::size_t blocks, std::size_t block_size, double p_in,
                                     double p_out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = blocks * block_size;
  PlantedGraph out;
  out.blocks.resize(n);
  for (NodeId v = 0; v < n; ++v) out.blocks[v] = v / block_size;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = out.blocks[i] == out.blocks[j] ? p_in : p_out;
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }
  out.graph = SimilarityGraph::from_edges(n, edges);
  return out;
}

SimilarityGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (unit(rng) < p) edges.emplace_back(i, j);
    }
  }
  return SimilarityGraph::from_edges(n, edges);
}

CoverageInstance random_coverage_instance(std::size_t n, std::size_t universe, std::size_t initial,
                                          double edge_prob, std::uint64_t seed) {
  if (n == 0 || universe == 0) throw ConfigError("coverage instance needs candidates and a universe");
  std::mt19937_64 rng(seed);
  CoverageInstance inst;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t size = 1 + static_cast<std::size_t>(rng() % std::max<std::size_t>(1, universe / 2));
    inst.features.push_back(sample_range(rng, 0, universe, size));
  }
  inst.target.resize(universe);
  std::iota(inst.target.begin(), inst.target.end(), 0);
  inst.graph = random_graph(n, edge_prob, rng());
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < std::min(initial, n); ++k) inst.frontier.add(order[k], FrontierOrigin::kAnchor);
  return inst;
}

}  // namespace demosel
