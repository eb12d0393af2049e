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

#include "demosel/gain.hpp"

#include <algorithm>
#include <iterator>

#include "demosel/error.hpp"
#include "demosel/hash.hpp"

namespace demosel {

namespace {

std::string template_hash(const PromptTemplate& t) {
  ContentHasher h;
  h.add(to_string(t.task))
      .add(t.preamble)
      .add(t.examples_header)
      .add(t.example_block_format)
      .add(t.target_block_format)
      .add(t.zero_shot_target_format)
      .add(t.task_description)
      .add(t.response_format)
      .add(t.scoring_format);
  return h.hex();
}

std::vector<NodeId> with_candidate(std::span<const NodeId> demos, NodeId candidate) {
  std::vector<NodeId> out(demos.begin(), demos.end());
  out.push_back(candidate);
  return out;
}

}  // namespace

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kEntropy:
      return "entropy";
    case OracleKind::kBlackbox:
      return "blackbox";
    case OracleKind::kCoverage:
      break;
  }
  return "coverage";
}

OracleKind parse_oracle_kind(std::string_view name) {
  if (name == "entropy") return OracleKind::kEntropy;
  if (name == "blackbox") return OracleKind::kBlackbox;
  if (name == "coverage") return OracleKind::kCoverage;
  throw ConfigError("unknown oracle '" + std::string(name) + "'");
}

// --- entropy ----------------------------------------------------------------

EntropyOracle::EntropyOracle(const Corpus& corpus, PromptTemplate tmpl,
                             std::shared_ptr<LogprobBackend> backend, bool cache)
    : corpus_(corpus),
      template_(std::move(tmpl)),
      backend_(std::move(backend)),
      cache_enabled_(cache) {
  if (!backend_) throw ConfigError("entropy oracle needs a logprob backend");
}

std::string EntropyOracle::identity() const { return "entropy:" + template_hash(template_); }

std::size_t EntropyOracle::backend_calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return backend_calls_;
}

TokenLoss EntropyOracle::nll(const std::string& text) {
  if (cache_enabled_) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(text);
    if (it != cache_.end()) return it->second;
  }
  // Backend call outside the lock; a racing duplicate computes the same value.
  TokenLoss loss = backend_->score(text);
  std::lock_guard<std::mutex> lock(mu_);
  ++backend_calls_;
  if (cache_enabled_) cache_.emplace(text, loss);
  return loss;
}

double EntropyOracle::cond_entropy(const Query& query, std::span<const NodeId> demos) {
  const RenderedPrompt parts = render_parts(template_, query, corpus_, demos);
  if (parts.query.empty()) return 0.0;
  const TokenLoss with_query = nll(parts.head + parts.query);
  const TokenLoss demos_only = nll(parts.head);
  return with_query.total_nll - demos_only.total_nll;
}

double EntropyOracle::marginal_gain(const Query& query, std::span<const NodeId> demos,
                                    NodeId candidate) {
  const double before = cond_entropy(query, demos);
  const std::vector<NodeId> extended = with_candidate(demos, candidate);
  return before - cond_entropy(query, extended);
}

// --- black box --------------------------------------------------------------

std::optional<int> parse_score(std::string_view reply) {
  const auto b = reply.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return std::nullopt;
  const auto e = reply.find_last_not_of(" \t\r\n");
  const std::string_view s = reply.substr(b, e - b + 1);
  if (s.empty() || s.size() > 2) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  if (s.size() == 2 && s[0] == '0') return std::nullopt;  // "07" is not canonical
  if (v > 10) return std::nullopt;
  return v;
}

BlackboxOracle::BlackboxOracle(const Corpus& corpus, PromptTemplate tmpl,
                               std::shared_ptr<ChatBackend> backend)
    : corpus_(corpus), template_(std::move(tmpl)), backend_(std::move(backend)) {
  if (!backend_) throw ConfigError("black-box oracle needs a chat backend");
}

std::string BlackboxOracle::identity() const { return "blackbox:" + template_hash(template_); }

int BlackboxOracle::score(const Query& query, std::span<const NodeId> demos, NodeId candidate) {
  const std::string prompt = render_scoring_prompt(template_, query, corpus_, demos, candidate);
  const std::string first = backend_->complete(prompt);
  if (auto v = parse_score(first)) return *v;
  const std::string second = backend_->complete(prompt + kReminder);
  if (auto v = parse_score(second)) return *v;
  std::lock_guard<std::mutex> lock(mu_);
  diagnostics_.push_back("candidate '" + corpus_[candidate].id + "' for query '" + query.id +
                         "': unparsable score replies '" + first + "', '" + second +
                         "'; scored 0");
  return 0;
}

double BlackboxOracle::marginal_gain(const Query& query, std::span<const NodeId> demos,
                                     NodeId candidate) {
  return static_cast<double>(score(query, demos, candidate));
}

std::vector<std::string> BlackboxOracle::diagnostics() const {
  std::lock_guard<std::mutex> lock(mu_);
  return diagnostics_;
}

// --- coverage ---------------------------------------------------------------

CoverageOracle::CoverageOracle(std::vector<std::vector<int>> features, std::vector<int> target)
    : features_(std::move(features)), target_(std::move(target)) {
  std::sort(target_.begin(), target_.end());
  target_.erase(std::unique(target_.begin(), target_.end()), target_.end());
  if (target_.empty()) throw ConfigError("coverage oracle needs a non-empty target");
  for (auto& f : features_) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    std::vector<int> kept;
    std::set_intersection(f.begin(), f.end(), target_.begin(), target_.end(),
                          std::back_inserter(kept));
    f = std::move(kept);
  }
}

std::string CoverageOracle::identity() const {
  ContentHasher h;
  for (int t : target_) h.add(static_cast<std::uint64_t>(static_cast<std::int64_t>(t)));
  h.add(static_cast<std::uint64_t>(features_.size()));
  for (const auto& f : features_) {
    h.add(static_cast<std::uint64_t>(f.size()));
    for (int x : f) h.add(static_cast<std::uint64_t>(static_cast<std::int64_t>(x)));
  }
  return "coverage:" + h.hex();
}

std::vector<int> CoverageOracle::covered_set(std::span<const NodeId> demos) const {
  std::vector<int> covered;
  for (NodeId v : demos) {
    if (v >= features_.size()) throw InvalidNodeError("coverage oracle has no features for node " + std::to_string(v));
    std::vector<int> merged;
    std::set_union(covered.begin(), covered.end(), features_[v].begin(), features_[v].end(),
                   std::back_inserter(merged));
    covered = std::move(merged);
  }
  return covered;
}

std::size_t CoverageOracle::covered(std::span<const NodeId> demos) const {
  return covered_set(demos).size();
}

std::optional<double> CoverageOracle::cond_score(const Query&, std::span<const NodeId> demos) {
  return static_cast<double>(target_.size() - covered(demos));
}

double CoverageOracle::marginal_gain(const Query&, std::span<const NodeId> demos, NodeId candidate) {
  if (candidate >= features_.size()) throw InvalidNodeError("coverage oracle has no features for node " + std::to_string(candidate));
  const std::vector<int> covered = covered_set(demos);
  std::vector<int> fresh;
  std::set_difference(features_[candidate].begin(), features_[candidate].end(), covered.begin(),
                      covered.end(), std::back_inserter(fresh));
  return static_cast<double>(fresh.size());
}

std::unique_ptr<CoverageOracle> make_coverage_oracle(std::vector<std::vector<int>> features,
                                                     std::vector<int> target) {
  return std::make_unique<CoverageOracle>(std::move(features), std::move(target));
}

namespace {

std::vector<int> positive_components(const Vector& v) {
  std::vector<int> out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v[k] > 0.0) out.push_back(static_cast<int>(k));
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> corpus_features(const Corpus& corpus) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.size());
  for (const InstanceRecord& r : corpus.records()) {
    out.push_back(r.features ? *r.features : positive_components(r.embedding));
  }
  return out;
}

std::vector<int> query_features(const Query& query) {
  return query.features ? *query.features : positive_components(query.embedding);
}

double pilot_delta_h(GainOracle& oracle, const Query& query, std::span<const NodeId> demos) {
  const auto zero_shot = oracle.cond_score(query, {});
  if (!zero_shot) {
    throw ConfigError("oracle '" + std::string(to_string(oracle.kind())) +
                      "' has no set-level score; pilot ΔH needs one");
  }
  if (demos.empty()) return 0.0;
  return *zero_shot - *oracle.cond_score(query, demos);
}

}  // namespace demosel
