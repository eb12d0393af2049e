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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "demosel/cohorts.hpp"
#include "demosel/core.hpp"
#include "demosel/error.hpp"
#include "demosel/gain.hpp"
#include "demosel/harness.hpp"
#include "demosel/lm_backend.hpp"
#include "demosel/prompts.hpp"
#include "demosel/search.hpp"
#include "demosel/simgraph.hpp"
#include "demosel/synthetic.hpp"

namespace demosel {

namespace fs = std::filesystem;

namespace {

struct OracleFlags {
  std::string kind = "coverage";
  std::string endpoint = "http://127.0.0.1:8000";
  std::string model = "default";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout = 60.0;
  int attempts = 3;
  int backoff_ms = 250;
  std::string task = "generic";
  std::string template_dir;

  EndpointConfig endpoint_config() const {
    EndpointConfig c;
    c.base_url = endpoint;
    c.model = model;
    c.api_key_env = api_key_env;
    c.timeout_seconds = timeout;
    c.max_attempts = attempts;
    c.backoff_base = std::chrono::milliseconds(backoff_ms);
    return c;
  }

  PromptTemplate prompt_template() const {
    const Task t = parse_task(task);
    return template_dir.empty() ? default_template(t) : load_template(t, template_dir);
  }

  void add_to(CLI::App* cmd) {
    cmd->add_option("--oracle", kind, "entropy | blackbox | coverage")->capture_default_str();
    cmd->add_option("--endpoint", endpoint, "OpenAI-compatible base URL")->capture_default_str();
    cmd->add_option("--model", model)->capture_default_str();
    cmd->add_option("--api-key-env", api_key_env, "environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--timeout", timeout, "request timeout in seconds")->capture_default_str();
    cmd->add_option("--attempts", attempts, "attempts per request")->capture_default_str();
    cmd->add_option("--backoff-ms", backoff_ms, "initial retry backoff")->capture_default_str();
    cmd->add_option("--task", task, "mortality | readmission | los | generic")
        ->capture_default_str();
    cmd->add_option("--template-dir", template_dir, "directory of prompt template files");
  }
};

struct SpecFlags {
  std::string spec_path;
  SyntheticSpec spec;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "JSON synthetic spec; flags below override it");
    cmd->add_option("--n-cohorts", spec.n_cohorts)->capture_default_str();
    cmd->add_option("--cohort-size", spec.cohort_size)->capture_default_str();
    cmd->add_option("--dim", spec.dim)->capture_default_str();
    cmd->add_option("--n-queries", spec.n_queries)->capture_default_str();
    cmd->add_option("--intra-spread", spec.intra_spread)->capture_default_str();
    cmd->add_option("--inter-separation", spec.inter_separation)->capture_default_str();
    cmd->add_option("--redundancy", spec.redundancy)->capture_default_str();
    cmd->add_option("--label-noise", spec.label_noise)->capture_default_str();
    cmd->add_option("--seed", spec.seed)->capture_default_str();
  }

  SyntheticSpec resolve(const CLI::App* cmd) const {
    if (spec_path.empty()) return spec;
    SyntheticSpec s = spec_from_json(read_text_file(spec_path));
    auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (given("--n-cohorts")) s.n_cohorts = spec.n_cohorts;
    if (given("--cohort-size")) s.cohort_size = spec.cohort_size;
    if (given("--dim")) s.dim = spec.dim;
    if (given("--n-queries")) s.n_queries = spec.n_queries;
    if (given("--intra-spread")) s.intra_spread = spec.intra_spread;
    if (given("--inter-separation")) s.inter_separation = spec.inter_separation;
    if (given("--redundancy")) s.redundancy = spec.redundancy;
    if (given("--label-noise")) s.label_noise = spec.label_noise;
    if (given("--seed")) s.seed = spec.seed;
    return s;
  }
};

void require_positive(std::size_t value, const char* flag) {
  if (value == 0) throw ConfigError(std::string(flag) + " must be positive");
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + out + ": " + ec.message());
  return dir;
}

// Builds one oracle per query. Coverage needs the query's feature target;
// the LM oracles share a backend.
class OracleBuilder {
 public:
  OracleBuilder(const OracleFlags& flags, const Corpus& corpus)
      : kind_(parse_oracle_kind(flags.kind)), corpus_(corpus) {
    if (kind_ == OracleKind::kCoverage) {
      features_ = corpus_features(corpus);
    } else {
      template_ = flags.prompt_template();
      if (kind_ == OracleKind::kEntropy) {
        logprob_ = std::make_shared<HttpLogprobBackend>(flags.endpoint_config());
      } else {
        chat_ = std::make_shared<HttpChatBackend>(flags.endpoint_config());
      }
    }
  }

  std::unique_ptr<GainOracle> build(const Query& query) const {
    switch (kind_) {
      case OracleKind::kCoverage: return make_coverage_oracle(features_, query_features(query));
      case OracleKind::kEntropy:
        return std::make_unique<EntropyOracle>(corpus_, template_, logprob_);
      case OracleKind::kBlackbox: return std::make_unique<BlackboxOracle>(corpus_, template_, chat_);
    }
    throw InvariantViolation("unhandled oracle kind");
  }

 private:
  OracleKind kind_;
  const Corpus& corpus_;
  std::vector<std::vector<int>> features_;
  PromptTemplate template_;
  std::shared_ptr<LogprobBackend> logprob_;
  std::shared_ptr<ChatBackend> chat_;
};

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw ConfigError("--methods is empty");
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-guided demonstration selection"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus, queries and manifest");
  SpecFlags gen_spec;
  std::string gen_out;
  gen_spec.add_to(gen);
  gen->add_option("--out", gen_out, "output directory")->required();

  // build-graph
  auto* bg = app.add_subcommand("build-graph", "build the symmetrized kNN graph");
  std::string bg_corpus, bg_out;
  std::size_t k_g = 8;
  unsigned bg_threads = 0;
  bg->add_option("--corpus", bg_corpus)->required();
  bg->add_option("--k-g", k_g, "neighbors per node")->capture_default_str();
  bg->add_option("--parallel", bg_threads, "worker threads (0 = hardware)");
  bg->add_option("--out", bg_out, "graph JSON path")->required();

  // cohorts
  auto* co = app.add_subcommand("cohorts", "partition the graph into cohorts");
  std::string co_graph, co_corpus, co_out, co_method = "leiden";
  CohortOptions co_opts;
  co->add_option("--graph", co_graph)->required();
  co->add_option("--corpus", co_corpus)->required();
  co->add_option("--method", co_method, "leiden | louvain")->capture_default_str();
  co->add_option("--resolution", co_opts.resolution)->capture_default_str();
  co->add_option("--seed", co_opts.seed)->capture_default_str();
  co->add_option("--restarts", co_opts.restarts)->capture_default_str();
  co->add_option("--out", co_out, "cohort JSON path")->required();

  // select
  auto* sel = app.add_subcommand("select", "select demonstrations for each query");
  std::string sel_corpus, sel_graph, sel_cohorts, sel_query, sel_out;
  std::string sel_mode = "lazy", sel_ablation = "none";
  bool no_early_stop = false;
  PipelineConfig pipe;
  OracleFlags sel_oracle;
  sel->add_option("--corpus", sel_corpus)->required();
  sel->add_option("--graph", sel_graph)->required();
  sel->add_option("--cohorts", sel_cohorts)->required();
  sel->add_option("--query", sel_query, "JSONL file of queries")->required();
  sel->add_option("--kc", pipe.k_c, "cohorts retrieved")->capture_default_str();
  sel->add_option("--ka", pipe.k_a, "anchors per cohort")->capture_default_str();
  sel->add_option("--budget", pipe.budget, "demonstration budget K")->capture_default_str();
  sel->add_option("--mode", sel_mode, "lazy | full")->capture_default_str();
  sel->add_flag("--no-early-stop", no_early_stop);
  sel->add_option("--ablation", sel_ablation, "none | no-cohort | no-greedy")
      ->capture_default_str();
  sel->add_option("--parallel", pipe.parallelism, "concurrent queries and oracle calls")
      ->capture_default_str();
  sel->add_option("--out", sel_out, "output directory")->required();
  sel_oracle.add_to(sel);

  // bench
  auto* bench = app.add_subcommand("bench", "run the synthetic pilot and write a report");
  SpecFlags bench_spec;
  PilotOptions pilot;
  std::string bench_methods = "random,topk_embedding,per_example_entropy,frontier_greedy";
  std::string bench_out;
  bool bench_no_early_stop = false;
  OracleFlags bench_oracle;
  bench_spec.add_to(bench);
  bench->add_option("--methods", bench_methods, "comma-separated methods")->capture_default_str();
  bench->add_option("--min-k", pilot.min_k)->capture_default_str();
  bench->add_option("--max-k", pilot.max_k)->capture_default_str();
  bench->add_option("--k-g", pilot.k_g)->capture_default_str();
  bench->add_option("--kc", pilot.k_c)->capture_default_str();
  bench->add_option("--ka", pilot.k_a)->capture_default_str();
  bench->add_option("--resolution", pilot.resolution)->capture_default_str();
  bench->add_flag("--no-early-stop", bench_no_early_stop);
  bench->add_option("--parallel", pilot.parallelism, "concurrent queries")->capture_default_str();
  bench->add_option("--f1-threshold", pilot.f1_threshold)->capture_default_str();
  bench->add_option("--out", bench_out, "output directory")->required();
  bench_oracle.add_to(bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInputError);
  }

  try {
    if (*gen) {
      const SyntheticSpec spec = gen_spec.resolve(gen);
      const SyntheticData data = generate_synthetic(spec);
      const fs::path dir = prepare_out_dir(gen_out);
      write_text_file((dir / "corpus.jsonl").string(), serialize_corpus(data.corpus));
      write_text_file((dir / "queries.jsonl").string(), serialize_queries(data.queries));
      write_text_file((dir / "manifest.json").string(), synthetic_manifest_json(spec, data));
      out << "wrote " << data.corpus.size() << " records and " << data.queries.size()
          << " queries to " << dir.string() << "\n";
    } else if (*bg) {
      require_positive(k_g, "--k-g");
      const Corpus corpus = ingest_corpus(bg_corpus);
      const SimilarityGraph graph = build_knn_graph(corpus, k_g, bg_threads);
      for (const auto& w : graph.warnings()) err << "warning: " << w << "\n";
      write_text_file(bg_out, graph_to_json(graph));
      out << "graph: " << graph.size() << " nodes, " << graph.edge_count() << " edges -> "
          << bg_out << "\n";
    } else if (*co) {
      co_opts.method = parse_community_method(co_method);
      if (!(co_opts.resolution > 0.0)) throw ConfigError("--resolution must be positive");
      if (co_opts.restarts < 1) throw ConfigError("--restarts must be at least 1");
      const Corpus corpus = ingest_corpus(co_corpus);
      const SimilarityGraph graph = graph_from_json(read_text_file(co_graph), corpus);
      CohortPartition partition = discover_cohorts(graph, co_opts);
      attach_prototypes(partition, corpus);
      write_text_file(co_out, cohorts_to_json(partition));
      out << "cohorts: " << partition.size() << " (" << to_string(partition.method)
          << ", Q=" << partition.modularity << ") -> " << co_out << "\n";
    } else if (*sel) {
      require_positive(pipe.budget, "--budget");
      require_positive(pipe.k_c, "--kc");
      require_positive(pipe.k_a, "--ka");
      pipe.parallelism = std::max(1u, pipe.parallelism);
      pipe.mode = parse_search_mode(sel_mode);
      pipe.ablation = parse_ablation(sel_ablation);
      pipe.early_stop = !no_early_stop;
      const Corpus corpus = ingest_corpus(sel_corpus);
      const SimilarityGraph graph = graph_from_json(read_text_file(sel_graph), corpus);
      const CohortPartition partition =
          cohorts_from_json(read_text_file(sel_cohorts), corpus, graph);
      const std::vector<Query> queries = ingest_queries(sel_query, corpus.dim());
      const PromptTemplate tmpl = sel_oracle.prompt_template();
      const OracleBuilder builder(sel_oracle, corpus);
      const fs::path dir = prepare_out_dir(sel_out);

      std::vector<SelectionTrace> traces(queries.size());
      std::atomic<std::size_t> next{0};
      std::mutex err_mu;
      std::exception_ptr failure;
      auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < queries.size(); i = next.fetch_add(1)) {
          try {
            auto oracle = builder.build(queries[i]);
            traces[i] = select_demonstrations(queries[i], corpus, graph, partition, *oracle, pipe);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      };
      const unsigned threads =
          std::min<unsigned>(pipe.parallelism, std::max<std::size_t>(1, queries.size()));
      if (threads <= 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
      if (failure) std::rethrow_exception(failure);

      int status = 0;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& trace = traces[i];
        const std::string stem = (dir / queries[i].id).string();
        write_text_file(stem + ".trace.json", trace_to_json(trace, corpus));
        const auto selected = trace.selected_ids();
        write_text_file(stem + ".prompt.txt", render(tmpl, queries[i], corpus, selected) + "\n");
        out << queries[i].id << ": " << selected.size() << " selected, "
            << to_string(trace.stop_reason) << ", " << trace.oracle_calls << " oracle calls\n";
        if (!trace.complete) {
          err << "error: " << queries[i].id << ": " << trace.error << "\n";
          status = static_cast<int>(ExitCode::kOracleError);
        }
      }
      return status;
    } else if (*bench) {
      pilot.spec = bench_spec.resolve(bench);
      pilot.methods = parse_methods(bench_methods);
      pilot.early_stop = !bench_no_early_stop;
      require_positive(pilot.max_k, "--max-k");
      OracleFactory factory;
      if (parse_oracle_kind(bench_oracle.kind) != OracleKind::kCoverage) {
        factory = [&](const SyntheticData& data, const Query& query) {
          return OracleBuilder(bench_oracle, data.corpus).build(query);
        };
      }
      const EvalReport report = run_pilot(pilot, factory);
      const fs::path dir = prepare_out_dir(bench_out);
      write_text_file((dir / "report.json").string(), report_to_json(report));
      write_text_file((dir / "report.csv").string(), report_to_csv(report));
      out << report_to_csv(report);
      if (report.partial) {
        err << "error: partial report: " << report.error << "\n";
        return static_cast<int>(ExitCode::kOracleError);
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInternalError);
  }
  return 0;
}

}  // namespace demosel
