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

// Seeded synthetic data: clustered embeddings with planted labels and
// coverage features, planted-partition graphs, and random coverage
// instances for the search tests.

#ifndef DEMOSEL_SYNTHETIC_HPP_
#define DEMOSEL_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "demosel/core.hpp"
#include "demosel/retrieval.hpp"
#include "demosel/simgraph.hpp"

namespace demosel {

struct SyntheticSpec {
  std::size_t n_cohorts = 8;
  std::size_t cohort_size = 25;
  std::size_t dim = 16;
  double intra_spread = 0.15;     // per-component noise around the centre
  double inter_separation = 1.0;  // norm of each cohort centre
  double redundancy = 0.8;        // core fraction each redundant record covers
  double label_noise = 0.1;       // probability of flipping the cohort label
  std::size_t n_queries = 20;
  std::uint64_t seed = 0;

  // Coverage feature layout per cohort block.
  std::size_t core_size = 100;
  std::size_t chunk_size = 20;
  std::size_t chunks_per_cohort = 6;
  std::size_t max_unique = 2;
  double redundant_fraction = 0.5;  // share of records carrying the shared core
};

struct SyntheticData {
  Corpus corpus;
  std::vector<Query> queries;  // labels and coverage targets filled in
  std::vector<std::size_t> record_cohort;  // planted cohort per record
  std::vector<std::size_t> query_cohort;
};

/// Deterministic in `spec`: equal specs give byte-identical serializations.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// JSON manifest listing ids and planted cohorts.
std::string synthetic_manifest_json(const SyntheticSpec& spec, const SyntheticData& data);

std::string spec_to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(std::string_view json);

struct PlantedGraph {
  SimilarityGraph graph;
  std::vector<std::size_t> blocks;  // planted block per node
};

/// Stochastic block model with `blocks` equal blocks.
PlantedGraph planted_partition_graph(std::size_t blocks, std::size_t block_size, double p_in,
                                     double p_out, std::uint64_t seed);

/// Erdős–Rényi graph.
SimilarityGraph random_graph(std::size_t n, double p, std::uint64_t seed);

struct CoverageInstance {
  std::vector<std::vector<int>> features;
  std::vector<int> target;
  SimilarityGraph graph;
  Frontier frontier;
};

/// `n` candidates over a universe of `universe` elements, each covering a
/// random subset; a random graph links them and `initial` random nodes seed
/// the frontier.
CoverageInstance random_coverage_instance(std::size_t n, std::size_t universe, std::size_t initial,
                                          double edge_prob, std::uint64_t seed);

}  // namespace demosel

#endif  // DEMOSEL_SYNTHETIC_HPP_
