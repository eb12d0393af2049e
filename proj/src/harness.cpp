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

#include "demosel/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "demosel/cohorts.hpp"
#include "demosel/error.hpp"
#include "demosel/metrics.hpp"
#include "demosel/simgraph.hpp"
#include "json.hpp"

namespace demosel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::optional<double> label_value(const Label& label) {
  if (const auto* i = std::get_if<std::int64_t>(&label)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&label)) return *d;
  const auto& s = std::get<std::string>(label);
  if (s == "0") return 0.0;
  if (s == "1") return 1.0;
  return std::nullopt;
}

double mean_label(const Corpus& corpus, std::span<const NodeId> demos) {
  double sum = 0.0;
  std::size_t n = 0;
  for (NodeId v : demos) {
    if (auto x = label_value(corpus[v].label)) {
      sum += *x;
      ++n;
    }
  }
  return n == 0 ? 0.5 : sum / static_cast<double>(n);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kRandom: return "random";
    case Method::kTopkEmbedding: return "topk_embedding";
    case Method::kPerExampleEntropy: return "per_example_entropy";
    case Method::kFrontierGreedy: return "frontier_greedy";
    case Method::kFrontierGreedyFull: return "frontier_greedy_full";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kRandom, Method::kTopkEmbedding, Method::kPerExampleEntropy,
                   Method::kFrontierGreedy, Method::kFrontierGreedyFull}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

double CountingOracle::marginal_gain(const Query& query, std::span<const NodeId> demos,
                                     NodeId candidate) {
  calls_.fetch_add(1);
  return inner_.marginal_gain(query, demos, candidate);
}

std::vector<NodeId> baseline_select(Method method, const Query& query, const Corpus& corpus,
                                    GainOracle* oracle, std::size_t k, std::uint64_t seed) {
  const std::size_t n = corpus.size();
  if (k > n) {
    throw ConfigError("budget " + std::to_string(k) + " exceeds corpus size " + std::to_string(n));
  }
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  switch (method) {
    case Method::kRandom: {
      std::mt19937_64 rng(seed);
      std::shuffle(ids.begin(), ids.end(), rng);
      ids.resize(k);
      return ids;
    }
    case Method::kTopkEmbedding:
      return top_k_by_similarity(query.embedding, corpus, ids, k);
    case Method::kPerExampleEntropy: {
      if (oracle == nullptr) throw ConfigError("per_example_entropy needs a gain oracle");
      std::vector<double> gain(n);
      for (NodeId v = 0; v < n; ++v) gain[v] = oracle->marginal_gain(query, {}, v);
      std::stable_sort(ids.begin(), ids.end(),
                       [&](NodeId a, NodeId b) { return gain[a] > gain[b]; });
      ids.resize(k);
      return ids;
    }
    default:
      throw ConfigError("'" + std::string(to_string(method)) + "' is not a baseline method");
  }
}

OracleFactory coverage_oracle_factory() {
  return [](const SyntheticData& data, const Query& query) -> std::unique_ptr<GainOracle> {
    return make_coverage_oracle(corpus_features(data.corpus), query_features(query));
  };
}

std::vector<double> EvalReport::delta_h_curve(Method method) const {
  std::vector<const ReportRow*> picked;
  for (const auto& row : rows) {
    if (row.method == method) picked.push_back(&row);
  }
  std::sort(picked.begin(), picked.end(),
            [](const ReportRow* a, const ReportRow* b) { return a->k < b->k; });
  std::vector<double> out;
  for (const auto* row : picked) out.push_back(row->mean_delta_h);
  return out;
}

const ReportRow* EvalReport::find(Method method, std::size_t k) const {
  for (const auto& row : rows) {
    if (row.method == method && row.k == k) return &row;
  }
  return nullptr;
}

EvalReport run_pilot(const PilotOptions& options, const OracleFactory& factory_in) {
  if (options.min_k > options.max_k) throw ConfigError("min_k exceeds max_k");
  const OracleFactory factory = factory_in ? factory_in : coverage_oracle_factory();
  const SyntheticData data = generate_synthetic(options.spec);
  const Corpus& corpus = data.corpus;

  bool needs_graph = false;
  for (Method m : options.methods) {
    needs_graph |= m == Method::kFrontierGreedy || m == Method::kFrontierGreedyFull;
  }
  SimilarityGraph graph;
  CohortPartition partition;
  if (needs_graph) {
    graph = build_knn_graph(corpus, options.k_g, 1);
    CohortOptions co;
    co.resolution = options.resolution;
    co.seed = options.spec.seed;
    partition = discover_cohorts(graph, co);
    attach_prototypes(partition, corpus);
  }

  EvalReport report;
  const std::size_t nq = data.queries.size();
  for (Method method : options.methods) {
    for (std::size_t k = options.min_k; k <= options.max_k; ++k) {
      ReportRow row;
      row.method = method;
      row.k = k;
      row.n_queries = nq;
      row.queries.resize(nq);
      const auto start = std::chrono::steady_clock::now();

      std::mutex err_mu;
      std::string error;
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t qi = next.fetch_add(1); qi < nq; qi = next.fetch_add(1)) {
          const Query& query = data.queries[qi];
          QueryResult& res = row.queries[qi];
          res.query_id = query.id;
          res.label = query.label ? static_cast<int>(label_value(*query.label).value_or(0.0) >= 0.5)
                                  : 0;
          try {
            auto oracle = factory(data, query);
            CountingOracle counting(*oracle);
            if (k > 0) {
              if (method == Method::kFrontierGreedy || method == Method::kFrontierGreedyFull) {
                PipelineConfig cfg;
                cfg.budget = k;
                cfg.k_c = options.k_c;
                cfg.k_a = options.k_a;
                cfg.mode = method == Method::kFrontierGreedy ? SearchMode::kLazyGreedy
                                                             : SearchMode::kFullGreedy;
                cfg.early_stop = options.early_stop;
                const auto trace =
                    select_demonstrations(query, corpus, graph, partition, counting, cfg);
                if (!trace.complete) throw OracleUnavailableError(trace.error);
                res.selected = trace.selected_ids();
              } else {
                res.selected = baseline_select(method, query, corpus, &counting, k,
                                               splitmix64(options.spec.seed ^ splitmix64(qi)));
              }
            }
            res.oracle_calls = counting.calls();
            res.delta_h = res.selected.empty() ? 0.0 : pilot_delta_h(*oracle, query, res.selected);
            res.prediction = mean_label(corpus, res.selected);
          } catch (const OracleUnavailableError& e) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (error.empty()) error = e.what();
          } catch (const ProtocolError& e) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (error.empty()) error = e.what();
          }
        }
      };
      const unsigned threads = std::max(1u, std::min<unsigned>(options.parallelism,
                                                               static_cast<unsigned>(nq)));
      if (threads == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start).count();
      if (!error.empty()) {
        report.partial = true;
        report.error = error;
        return report;
      }

      std::vector<double> scores;
      std::vector<int> labels;
      double sum = 0.0;
      for (const auto& res : row.queries) {
        scores.push_back(res.prediction);
        labels.push_back(res.label);
        sum += res.delta_h;
        row.oracle_calls += res.oracle_calls;
      }
      row.mean_delta_h = nq == 0 ? 0.0 : sum / static_cast<double>(nq);
      const auto positives = std::count(labels.begin(), labels.end(), 1);
      if (positives > 0 && positives < static_cast<long>(labels.size())) {
        row.auroc = auroc(scores, labels);
        row.auprc = auprc(scores, labels);
      }
      row.f1 = f1(scores, labels, options.f1_threshold);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["partial"] = report.partial;
  if (report.partial) j["error"] = report.error;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["method"] = to_string(row.method);
    r["k"] = row.k;
    r["n_queries"] = row.n_queries;
    r["mean_delta_h"] = row.mean_delta_h;
    r["auroc"] = row.auroc ? nlohmann::ordered_json(*row.auroc) : nlohmann::ordered_json();
    r["auprc"] = row.auprc ? nlohmann::ordered_json(*row.auprc) : nlohmann::ordered_json();
    r["f1"] = row.f1;
    r["oracle_calls"] = row.oracle_calls;
    r["wall_ms"] = row.wall_ms;
    auto qs = nlohmann::ordered_json::array();
    for (const auto& q : row.queries) {
      qs.push_back({{"query_id", q.query_id},
                    {"selected", q.selected},
                    {"delta_h", q.delta_h},
                    {"prediction", q.prediction},
                    {"label", q.label},
                    {"oracle_calls", q.oracle_calls}});
    }
    r["queries"] = std::move(qs);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "method,k,n_queries,mean_delta_h,auroc,auprc,f1,oracle_calls\n";
  for (const auto& row : report.rows) {
    out += std::string(to_string(row.method)) + "," + std::to_string(row.k) + "," +
           std::to_string(row.n_queries) + "," + fmt(row.mean_delta_h) + "," +
           (row.auroc ? fmt(*row.auroc) : "") + "," + (row.auprc ? fmt(*row.auprc) : "") + "," +
           fmt(row.f1) + "," + std::to_string(row.oracle_calls) + "\n";
  }
  return out;
}

}  // namespace demosel
