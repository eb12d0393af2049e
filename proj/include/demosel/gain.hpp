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

// Gain oracles: conditional-entropy gain from prompt log-likelihoods, a
// black-box 0-10 self-evaluation score, and an exact set-coverage oracle.

#ifndef DEMOSEL_GAIN_HPP_
#define DEMOSEL_GAIN_HPP_

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "demosel/core.hpp"
#include "demosel/prompts.hpp"

namespace demosel {

struct TokenLoss {
  double total_nll = 0.0;  // nats, summed over tokens
  std::size_t token_count = 0;
};

/// Anything that can report the summed token NLL of a text.
class LogprobBackend {
 public:
  virtual ~LogprobBackend() = default;
  virtual TokenLoss score(const std::string& text) = 0;
};

/// Single-turn chat completion.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

enum class OracleKind { kEntropy, kBlackbox, kCoverage };

std::string_view to_string(OracleKind kind);
OracleKind parse_oracle_kind(std::string_view name);

/// Marginal-gain contract consumed by the search. Implementations must be
/// pure (same arguments, same value) and safe for concurrent calls.
class GainOracle {
 public:
  virtual ~GainOracle() = default;

  virtual OracleKind kind() const = 0;

  /// Gain of appending `candidate` to the ordered demonstration set `demos`.
  virtual double marginal_gain(const Query& query, std::span<const NodeId> demos,
                               NodeId candidate) = 0;

  /// Set-level score whose decrease is the gain (conditional entropy, or
  /// uncovered count). Oracles without one return nullopt.
  virtual std::optional<double> cond_score(const Query& /*query*/,
                                           std::span<const NodeId> /*demos*/) {
    return std::nullopt;
  }

  /// Kind tag plus a hash of the configuration.
  virtual std::string identity() const = 0;
};

/// H(x|S) = NLL(prompt up to and including the query record) − NLL(the same
/// prompt without the query record). Both prompts share the preamble and
/// demonstrations, so only query tokens survive the difference.
class EntropyOracle : public GainOracle {
 public:
  EntropyOracle(const Corpus& corpus, PromptTemplate tmpl, std::shared_ptr<LogprobBackend> backend,
                bool cache = true);

  OracleKind kind() const override { return OracleKind::kEntropy; }
  double marginal_gain(const Query& query, std::span<const NodeId> demos,
                       NodeId candidate) override;
  std::optional<double> cond_score(const Query& query, std::span<const NodeId> demos) override {
    return cond_entropy(query, demos);
  }
  std::string identity() const override;

  double cond_entropy(const Query& query, std::span<const NodeId> demos);

  /// Number of texts actually sent to the backend.
  std::size_t backend_calls() const;

 private:
  TokenLoss nll(const std::string& text);

  const Corpus& corpus_;
  PromptTemplate template_;
  std::shared_ptr<LogprobBackend> backend_;
  bool cache_enabled_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, TokenLoss> cache_;
  std::size_t backend_calls_ = 0;
};

/// Parses a self-evaluation reply: an integer 0..10 with optional
/// surrounding whitespace, nothing else.
std::optional<int> parse_score(std::string_view reply);

/// Gain surrogate from a chat model's 0-10 usefulness rating. An unparsable
/// reply is retried once with a stricter reminder; a second failure scores 0
/// and is logged in diagnostics().
class BlackboxOracle : public GainOracle {
 public:
  BlackboxOracle(const Corpus& corpus, PromptTemplate tmpl, std::shared_ptr<ChatBackend> backend);

  OracleKind kind() const override { return OracleKind::kBlackbox; }
  double marginal_gain(const Query& query, std::span<const NodeId> demos,
                       NodeId candidate) override;
  std::string identity() const override;

  int score(const Query& query, std::span<const NodeId> demos, NodeId candidate);
  std::vector<std::string> diagnostics() const;

  static constexpr const char* kReminder =
      "\n\nReminder: reply with a single integer from 0 to 10 and nothing else.";

 private:
  const Corpus& corpus_;
  PromptTemplate template_;
  std::shared_ptr<ChatBackend> backend_;
  mutable std::mutex mu_;
  std::vector<std::string> diagnostics_;
};

/// cond_score(S) = |target \ ∪_{v∈S} features(v)|; the gain of v is the
/// number of target elements it newly covers. Monotone submodular.
class CoverageOracle : public GainOracle {
 public:
  /// `features[v]` is the feature set of node v. `target` must be non-empty.
  CoverageOracle(std::vector<std::vector<int>> features, std::vector<int> target);

  OracleKind kind() const override { return OracleKind::kCoverage; }
  double marginal_gain(const Query& query, std::span<const NodeId> demos,
                       NodeId candidate) override;
  std::optional<double> cond_score(const Query& query, std::span<const NodeId> demos) override;
  std::string identity() const override;

  std::size_t target_size() const { return target_.size(); }
  /// |target ∩ ∪ features(S)|, the set-function value.
  std::size_t covered(std::span<const NodeId> demos) const;

 private:
  std::vector<int> covered_set(std::span<const NodeId> demos) const;

  std::vector<std::vector<int>> features_;  // each sorted, restricted to target
  std::vector<int> target_;                 // sorted, unique
};

std::unique_ptr<CoverageOracle> make_coverage_oracle(std::vector<std::vector<int>> features,
                                                     std::vector<int> target);

/// Feature sets for a corpus: the explicit "features" of each record, or,
/// when absent, the indices of its positive embedding components.
std::vector<std::vector<int>> corpus_features(const Corpus& corpus);
std::vector<int> query_features(const Query& query);

/// ΔH(S) = H(x|∅) − H(x|S), gain relative to the zero-shot prompt. Requires
/// an oracle exposing cond_score.
double pilot_delta_h(GainOracle& oracle, const Query& query, std::span<const NodeId> demos);

}  // namespace demosel

#endif  // DEMOSEL_GAIN_HPP_
