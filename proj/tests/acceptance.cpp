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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is zero
// only when every criterion passes.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <queue>
#include <random>
#include <regex>
#include <sstream>

#include "brute.hpp"
#include "cli.hpp"
#include "demosel/cohorts.hpp"
#include "demosel/gain.hpp"
#include "demosel/harness.hpp"
#include "demosel/lm_backend.hpp"
#include "demosel/metrics.hpp"
#include "demosel/search.hpp"
#include "demosel/synthetic.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "mock_lm.hpp"

using namespace demosel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

const Query& dummy_query() {
  static const Query q = fixtures::make_query({1.0, 0.0});
  return q;
}

// Instances shared by the equivalence and call-count criteria.
struct EquivalenceCase {
  std::size_t n, k;
  bool early_stop;
  CoverageInstance inst;
};

std::vector<EquivalenceCase> equivalence_cases() {
  std::vector<EquivalenceCase> out;
  for (std::uint64_t s = 0; s < 150; ++s) {
    const std::size_t n = 6 + s % 15;          // 6..20
    const std::size_t k = 1 + (s / 3) % 5;     // 1..5
    const std::size_t universe = 15 + (s * 7) % 46;
    const std::size_t initial = 1 + s % 5;
    const double edge_prob = 0.15 + 0.1 * static_cast<double>(s % 4);
    out.push_back({n, k, s % 7 != 0, random_coverage_instance(n, universe, initial, edge_prob, s)});
  }
  return out;
}

Outcome lazy_full_equivalence() {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, total = 0;
  for (const auto& c : equivalence_cases()) {
    CoverageOracle o(c.inst.features, c.inst.target);
    const SearchOptions opt{c.k, c.early_stop, 1};
    const auto full = full_greedy_select(dummy_query(), c.inst.frontier, c.inst.graph, o, opt);
    const auto lazy = lazy_greedy_select(dummy_query(), c.inst.frontier, c.inst.graph, o, opt);
    ++total;
    bool same = full.selected_ids() == lazy.selected_ids() && full.stop_reason == lazy.stop_reason;
    for (std::size_t i = 0; same && i < full.selected.size(); ++i) {
      same = full.selected[i].gain == lazy.selected[i].gain;
    }
    mismatches += !same;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && total >= 100 && secs < 10.0,
          std::to_string(total) + " instances, " + std::to_string(mismatches) + " mismatches, " +
              fmt(secs) + " s"};
}

Outcome approximation_bound() {
  const auto t0 = Clock::now();
  const double ratio = 1.0 - 1.0 / std::exp(1.0);
  std::size_t violations = 0, total = 0;
  double worst = 1.0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const std::size_t n = 5 + s % 8;       // 5..12
    const std::size_t k = 1 + s % 4;       // 1..4
    auto inst = random_coverage_instance(n, 10 + s % 20, n, 0.0, 500 + s);
    CoverageOracle o(inst.features, inst.target);
    const auto t = full_greedy_select(dummy_query(), inst.frontier, inst.graph, o, {k, true, 1});
    const auto ids = t.selected_ids();
    const double value = static_cast<double>(
        brute::covered(inst.features, inst.target, std::vector<std::size_t>(ids.begin(), ids.end())));
    const double opt = static_cast<double>(brute::coverage_opt(inst.features, inst.target, k));
    ++total;
    if (opt > 0) worst = std::min(worst, value / opt);
    violations += value < ratio * opt;
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && total >= 50 && secs < 30.0,
          std::to_string(total) + " instances, " + std::to_string(violations) +
              " violations, worst ratio " + fmt(worst) + ", " + fmt(secs) + " s"};
}

bool connected(const SimilarityGraph& g, const std::vector<NodeId>& members) {
  std::set<NodeId> in(members.begin(), members.end()), seen{members.front()};
  std::queue<NodeId> todo;
  todo.push(members.front());
  while (!todo.empty()) {
    const NodeId v = todo.front();
    todo.pop();
    for (NodeId u : g.neighbors(v)) {
      if (in.count(u) && seen.insert(u).second) todo.push(u);
    }
  }
  return seen.size() == in.size();
}

Outcome modularity_oracle() {
  std::mt19937_64 rng(17);
  double max_err = 0.0;
  std::size_t graphs = 0, disconnected = 0, decreasing = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const std::size_t n = 4 + rng() % 197;  // 4..200
    const SimilarityGraph g =
        s % 2 ? random_graph(n, 2.0 + static_cast<double>(rng() % 8) / static_cast<double>(n), s)
              : planted_partition_graph(2 + s % 5, std::max<std::size_t>(2, n / (2 + s % 5)), 0.3,
                                        0.02, s)
                    .graph;
    if (g.edge_count() == 0) continue;
    ++graphs;
    std::vector<std::size_t> a(g.size());
    const std::size_t parts = 1 + rng() % 10;
    for (auto& x : a) x = rng() % parts;
    for (double gamma : {1.0, 0.9}) {
      max_err = std::max(max_err, std::abs(modularity(g, a, gamma) -
                                           brute::modularity(g.size(), g.edges(), a, gamma)));
    }
    CohortOptions opt;
    opt.seed = s;
    const auto p = discover_cohorts(g, opt);
    for (const auto& members : p.cohorts) disconnected += !connected(g, members);
    for (std::size_t l = 1; l < p.level_modularity.size(); ++l) {
      decreasing += p.level_modularity[l] < p.level_modularity[l - 1] - 1e-12;
    }
    max_err = std::max(max_err, std::abs(p.modularity -
                                         brute::modularity(g.size(), g.edges(), p.assignment, 0.9)));
  }
  const std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  const auto two = SimilarityGraph::from_edges(6, tri);
  const std::vector<CohortId> split{0, 0, 0, 1, 1, 1};
  const double q_fixed = modularity(two, split);
  CohortOptions unit;
  unit.resolution = 1.0;
  const double q_found = discover_cohorts(two, unit).modularity;
  const bool pass = graphs >= 50 && max_err <= 1e-9 && disconnected == 0 && decreasing == 0 &&
                    q_fixed == 0.5 && std::abs(q_found - 0.5) < 1e-15;
  return {pass, std::to_string(graphs) + " graphs, max |Q - brute| " + fmt(max_err * 1e12, 3) +
                    "e-12, disconnected cohorts " + std::to_string(disconnected) +
                    ", level decreases " + std::to_string(decreasing) + ", two triangles Q=" +
                    fmt(q_fixed, 12) + " / Leiden " + fmt(q_found, 12)};
}

Outcome knn_retrieval_oracle() {
  std::size_t corpora = 0, mismatches = 0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    const std::size_t n = 40 + 65 * s;  // up to 495
    const auto vs = fixtures::random_vectors(n, 3 + s % 6, 900 + s);
    const Corpus c = fixtures::make_corpus(vs);
    ++corpora;
    for (std::size_t k : {1, 4, 8}) {
      const auto g = build_knn_graph(c, k);
      const auto ref = brute::knn(vs, k);
      std::set<std::pair<std::size_t, std::size_t>> directed, undirected;
      for (const auto& e : g.directed_edges()) directed.emplace(e.from, e.to);
      for (auto [i, j] : g.edges()) undirected.emplace(i, j);
      mismatches += directed != ref.directed;
      mismatches += undirected != ref.undirected;
    }
    const auto g = build_knn_graph(c, 8);
    auto p = discover_cohorts(g, CohortOptions{});
    attach_prototypes(p, c);
    std::vector<brute::Vec> protos;
    for (const auto& m : p.cohorts) protos.push_back(brute::mean(vs, m));
    std::vector<std::size_t> ids(p.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(s);
    std::normal_distribution<double> n01;
    for (int t = 0; t < 25; ++t) {
      brute::Vec qv(vs[0].size());
      for (double& x : qv) x = n01(rng);
      const Query q = fixtures::make_query(qv);
      const auto got = retrieve_cohorts(q, p, 3);
      mismatches += std::vector<std::size_t>(got.begin(), got.end()) != brute::rank(qv, protos, ids, 3);
      const auto f = init_anchors(q, p, got, 3, c);
      std::set<NodeId> expect;
      for (CohortId m : got) {
        for (auto v : brute::rank(qv, vs, p.cohorts[m], 3)) expect.insert(v);
      }
      mismatches += f.members() != expect;
    }
  }
  return {mismatches == 0,
          std::to_string(corpora) + " corpora (n <= 495), " + std::to_string(mismatches) + " mismatches"};
}

Outcome entropy_algebra() {
  const double ln2 = std::log(2.0), ln4 = std::log(4.0);
  double max_err = 0.0;
  std::mt19937_64 rng(99);
  std::vector<std::vector<std::string>> toks;
  std::vector<std::string> texts;
  for (int v = 0; v < 10; ++v) {
    std::vector<std::string> t;
    std::string text;
    for (int k = 0; k < 3; ++k) {
      t.push_back("w" + std::to_string(rng() % 16));
      text += (k ? " " : "") + t.back();
    }
    toks.push_back(t);
    texts.push_back(text);
  }
  const Corpus c = fixtures::make_corpus(std::vector<std::vector<double>>(10, {1.0, 0.0}), texts);
  EntropyOracle uniform(c, default_template(Task::kGeneric), std::make_shared<mock::AnalyticLM>(true));
  EntropyOracle repeat(c, default_template(Task::kGeneric), std::make_shared<mock::AnalyticLM>());
  std::size_t telescoping_checks = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> qt;
    std::string qtext;
    for (int k = 0; k < 5; ++k) {
      qt.push_back("w" + std::to_string(rng() % 16));
      qtext += (k ? " " : "") + qt.back();
    }
    const Query q = fixtures::make_query({1.0, 0.0}, qtext);
    std::vector<NodeId> s(10);
    std::iota(s.begin(), s.end(), 0);
    std::shuffle(s.begin(), s.end(), rng);
    s.resize(1 + trial % 4);

    max_err = std::max(max_err, std::abs(uniform.cond_entropy(q, s) - 5 * ln4));
    std::set<std::string> seen;
    for (NodeId v : s) seen.insert(toks[v].begin(), toks[v].end());
    double closed = 0;
    for (const auto& t : qt) {
      closed += seen.count(t) ? ln2 : ln4;
      seen.insert(t);
    }
    max_err = std::max(max_err, std::abs(repeat.cond_entropy(q, s) - closed));

    const double total = pilot_delta_h(repeat, q, s);
    std::sort(s.begin(), s.end());
    do {
      std::vector<NodeId> prefix;
      double sum = 0;
      for (NodeId v : s) {
        sum += repeat.marginal_gain(q, prefix, v);
        prefix.push_back(v);
      }
      max_err = std::max(max_err, std::abs(sum - total));
      ++telescoping_checks;
    } while (std::next_permutation(s.begin(), s.end()));
  }
  return {max_err <= 1e-9, "20 demo sets, " + std::to_string(telescoping_checks) +
                               " insertion orders, max error " + fmt(max_err * 1e12, 3) + "e-12"};
}

Outcome pilot_trend() {
  const auto t0 = Clock::now();
  int ok = 0, greedy_ahead = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    PilotOptions opt;
    opt.spec.seed = static_cast<std::uint64_t>(s);
    opt.spec.redundancy = 0.8;
    opt.methods = {Method::kPerExampleEntropy, Method::kFrontierGreedy};
    opt.min_k = 0;
    opt.max_k = 4;
    const auto report = run_pilot(opt);
    const auto greedy = report.delta_h_curve(Method::kFrontierGreedy);
    const auto per = report.delta_h_curve(Method::kPerExampleEntropy);
    bool monotone = true, diminishing = true;
    for (std::size_t k = 2; k <= 4; ++k) monotone &= greedy[k] >= greedy[k - 1];
    for (std::size_t k = 2; k <= 4; ++k) {
      diminishing &= (per[k] - per[k - 1]) < (per[k - 1] - per[k - 2]);
    }
    ok += monotone && diminishing;
    greedy_ahead += greedy[4] >= per[4];
  }
  const double secs = seconds_since(t0);
  return {ok >= 48 && secs < 60.0,
          std::to_string(ok) + "/" + std::to_string(trials) + " trials show the trend (greedy ahead at k=4 in " +
              std::to_string(greedy_ahead) + "), " + fmt(secs) + " s"};
}

Outcome early_stop() {
  std::size_t instances = 0, failures = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    // A small universe that a few records exhaust, with a generous budget.
    auto inst = random_coverage_instance(12, 6, 12, 0.3, 700 + s);
    CoverageOracle o(inst.features, inst.target);
    const std::size_t budget = 10;
    for (auto mode : {SearchMode::kFullGreedy, SearchMode::kLazyGreedy}) {
      auto run = [&](bool stop) {
        const SearchOptions opt{budget, stop, 1};
        return mode == SearchMode::kFullGreedy
                   ? full_greedy_select(dummy_query(), inst.frontier, inst.graph, o, opt)
                   : lazy_greedy_select(dummy_query(), inst.frontier, inst.graph, o, opt);
      };
      ++instances;
      const auto on = run(true);
      bool good = on.stop_reason == StopReason::kNoPositiveGain && on.selected.size() < budget;
      for (const auto& st : on.selected) good &= st.gain > 0.0;
      const auto off = run(false);
      good &= off.selected.size() == budget && off.stop_reason == StopReason::kBudgetReached;
      failures += !good;
    }
  }
  return {failures == 0, std::to_string(instances) + " runs, " + std::to_string(failures) + " failures"};
}

Outcome call_counts() {
  std::size_t total = 0, worse = 0, large = 0, large_short = 0;
  std::size_t large_full = 0, large_lazy = 0;
  double min_reduction = 1.0;
  for (const auto& c : equivalence_cases()) {
    CoverageOracle o(c.inst.features, c.inst.target);
    const SearchOptions opt{c.k, c.early_stop, 1};
    const auto full = full_greedy_select(dummy_query(), c.inst.frontier, c.inst.graph, o, opt);
    const auto lazy = lazy_greedy_select(dummy_query(), c.inst.frontier, c.inst.graph, o, opt);
    ++total;
    worse += lazy.oracle_calls > full.oracle_calls;
    if (c.n >= 15 && c.k >= 4) {
      ++large;
      large_full += full.oracle_calls;
      large_lazy += lazy.oracle_calls;
      const double reduction =
          1.0 - static_cast<double>(lazy.oracle_calls) / static_cast<double>(full.oracle_calls);
      min_reduction = std::min(min_reduction, reduction);
      large_short += reduction < 0.30;
    }
  }
  return {worse == 0 && large > 0 && large_short == 0,
          std::to_string(total) + " instances, lazy > full on " + std::to_string(worse) + "; " +
              std::to_string(large) + " large instances, " + std::to_string(large_short) +
              " below 30%, min reduction " + fmt(100 * min_reduction, 1) + "%, pooled " +
              fmt(100 * (1.0 - static_cast<double>(large_lazy) / std::max<double>(1, large_full)), 1) +
              "%"};
}

Outcome metric_fidelity() {
  const std::vector<double> s0{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y0{0, 0, 1, 1};
  const double fixture = auroc(s0, y0);
  double max_err = std::abs(fixture - 0.75);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 199;
    std::vector<double> s(n);
    std::vector<int> y(n);
    const int levels = 1 + static_cast<int>(rng() % 20);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 ? static_cast<double>(rng() % levels) / levels
                   : std::uniform_real_distribution<double>()(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    max_err = std::max(max_err, std::abs(auroc(s, y) - brute::auroc(s, y)));
    max_err = std::max(max_err, std::abs(auprc(s, y) - brute::average_precision(s, y)));
    max_err = std::max(max_err, std::abs(f1(s, y) - brute::f1(s, y, 0.5)));
  }
  return {max_err <= 1e-9, "200 inputs (n <= 200), fixture AUROC " + fmt(fixture, 4) +
                               ", max error " + fmt(max_err * 1e12, 3) + "e-12"};
}

Outcome end_to_end() {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("demosel_accept_" + std::to_string(rd()));
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::ostringstream out, err;
  const auto t0 = Clock::now();
  auto run = [&](std::vector<std::string> args) { return run_cli(args, out, err); };
  int code = run({"generate", "--n-cohorts", "40", "--cohort-size", "25", "--n-queries", "1",
                  "--out", p("data")});
  if (code == 0) code = run({"build-graph", "--corpus", p("data/corpus.jsonl"), "--k-g", "8",
                             "--out", p("graph.json")});
  if (code == 0) code = run({"cohorts", "--graph", p("graph.json"), "--corpus",
                             p("data/corpus.jsonl"), "--method", "leiden", "--resolution", "0.9",
                             "--out", p("cohorts.json")});
  if (code == 0) code = run({"select", "--corpus", p("data/corpus.jsonl"), "--graph",
                             p("graph.json"), "--cohorts", p("cohorts.json"), "--query",
                             p("data/queries.jsonl"), "--budget", "4", "--oracle", "coverage",
                             "--out", p("sel")});
  const double secs = seconds_since(t0);
  Outcome o;
  if (code != 0) {
    o = {false, "pipeline exited " + std::to_string(code) + ": " + err.str()};
  } else {
    const Corpus corpus = ingest_corpus(p("data/corpus.jsonl"));
    const auto trace = nlohmann::json::parse(read_text_file(p("sel/q0.trace.json")));
    const std::string prompt = read_text_file(p("sel/q0.prompt.txt"));
    const std::regex block("(^|\n)Example [0-9]+:\n");
    const auto blocks = static_cast<std::size_t>(std::distance(
        std::sregex_iterator(prompt.begin(), prompt.end(), block), std::sregex_iterator()));
    const std::size_t k = trace["selected"].size();
    std::set<std::size_t> distinct;
    for (const auto& s : trace["selected"]) distinct.insert(s["node"].get<std::size_t>());
    const bool valid = corpus.size() == 1000 && trace["complete"] == true &&
                       trace["stop_reason"].is_string() && k >= 1 && k <= 4 &&
                       distinct.size() == k;
    o = {valid && blocks == k && secs < 10.0,
         "1000 records, " + std::to_string(k) + " selected (" +
             trace["stop_reason"].get<std::string>() + "), " + std::to_string(blocks) +
             " example blocks, " + fmt(secs) + " s"};
  }
  fs::remove_all(dir);
  return o;
}

Outcome wire_protocol() {
  mock::Server server;
  EndpointConfig cfg;
  cfg.base_url = server.url();
  cfg.model = "mock";
  cfg.timeout_seconds = 5;
  cfg.backoff_base = std::chrono::milliseconds(1);

  double max_err = 0.0;
  const Corpus c = fixtures::make_corpus({{1.0, 0.0}, {0.0, 1.0}}, {"alpha beta gamma", "beta delta"});
  const Query q = fixtures::make_query({1.0, 0.2}, "beta gamma epsilon beta");
  HttpLogprobBackend backend(cfg);
  const PromptTemplate tmpl = default_template(Task::kMortality);
  for (const std::vector<NodeId>& s : {std::vector<NodeId>{}, {0}, {1, 0}}) {
    const auto parts = render_parts(tmpl, q, c, s);
    for (const std::string& text : {parts.head, parts.head + parts.query}) {
      max_err = std::max(max_err, std::abs(backend.score(text).total_nll - mock::analytic_nll(text, false)));
    }
  }
  EntropyOracle remote(c, tmpl, std::make_shared<HttpLogprobBackend>(cfg));
  EntropyOracle local(c, tmpl, std::make_shared<mock::AnalyticLM>());
  const std::vector<NodeId> one{0};
  max_err = std::max(max_err, std::abs(remote.cond_entropy(q, one) - local.cond_entropy(q, one)));

  BlackboxOracle scorer(c, tmpl, std::make_shared<HttpChatBackend>(cfg));
  int accepted = 0, rejected = 0;
  for (int v = 0; v <= 10; ++v) {
    server.push_reply(" " + std::to_string(v) + "\n");
    accepted += scorer.score(q, {}, 0) == v;
  }
  for (const std::string bad : {"11", "-1", "42", "7/10", "Score: 5"}) {
    server.push_reply(bad);
    server.push_reply(bad);
    rejected += scorer.score(q, {}, 0) == 0;
  }
  const bool diag = scorer.diagnostics().size() == 5;
  return {max_err <= 1e-6 && accepted == 11 && rejected == 5 && diag,
          "max NLL error " + fmt(max_err * 1e9, 3) + "e-9, accepted " + std::to_string(accepted) +
              "/11 in-range replies, rejected " + std::to_string(rejected) + "/5 invalid replies"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 lazy/full greedy equivalence", lazy_full_equivalence},
      {"2 greedy approximation bound", approximation_bound},
      {"3 modularity oracle equivalence", modularity_oracle},
      {"4 kNN/retrieval oracle equivalence", knn_retrieval_oracle},
      {"5 entropy algebra", entropy_algebra},
      {"6 pilot-trend reproduction", pilot_trend},
      {"7 early-stop behavior", early_stop},
      {"8 lazy-greedy call reduction", call_counts},
      {"9 metric fidelity", metric_fidelity},
      {"10 end-to-end smoke", end_to_end},
      {"11 wire-protocol conformance", wire_protocol},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
