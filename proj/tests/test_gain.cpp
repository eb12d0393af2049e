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

#include <algorithm>
#include <cmath>
#include <random>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "demosel/error.hpp"
#include "demosel/gain.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "mock_lm.hpp"

using namespace demosel;

namespace {

const double kLn2 = std::log(2.0);
const double kLn4 = std::log(4.0);

Query text_query(std::string text) {
  Query q = fixtures::make_query({1, 0}, std::move(text));
  q.id = "q1";
  return q;
}

// Closed form for the repeat-aware mock: a query token costs ln 2 when it
// occurs in a selected record or earlier in the query, ln 4 otherwise.
double closed_form(const std::vector<std::string>& query_tokens,
                   const std::vector<std::vector<std::string>>& record_tokens,
                   const std::vector<NodeId>& demos) {
  std::set<std::string> seen;
  for (NodeId v : demos) seen.insert(record_tokens[v].begin(), record_tokens[v].end());
  double h = 0;
  for (const auto& t : query_tokens) {
    h += seen.count(t) ? kLn2 : kLn4;
    seen.insert(t);
  }
  return h;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : " ") + x;
  return out;
}

}  // namespace

TEST_CASE("uniform mock gives 3 ln 4 for a three-token query") {
  const Corpus c = fixtures::make_corpus({{1, 0}, {0, 1}}, {"alpha beta", "gamma"});
  EntropyOracle o(c, default_template(Task::kGeneric), std::make_shared<mock::AnalyticLM>(true));
  const Query q = text_query("t1 t2 t3");
  for (const std::vector<NodeId>& s : {std::vector<NodeId>{}, {0}, {1, 0}}) {
    CHECK(std::abs(o.cond_entropy(q, s) - 3 * kLn4) < 1e-9);
  }
  CHECK(o.cond_entropy(text_query(""), std::vector<NodeId>{0}) == 0.0);
}

TEST_CASE("an informative demonstration halves each query token probability") {
  const Corpus c = fixtures::make_corpus({{1, 0}, {0, 1}}, {"zq1 zq2 zq3", "unrelated words"});
  EntropyOracle o(c, default_template(Task::kGeneric), std::make_shared<mock::AnalyticLM>());
  const Query q = text_query("zq1 zq2 zq3");
  const std::vector<NodeId> none;
  CHECK(std::abs(o.cond_entropy(q, none) - 3 * kLn4) < 1e-9);
  CHECK(std::abs(o.marginal_gain(q, none, 0) - 3 * kLn2) < 1e-9);
  CHECK(std::abs(o.marginal_gain(q, none, 1)) < 1e-12);
  CHECK(std::abs(pilot_delta_h(o, q, std::vector<NodeId>{0}) - 3 * kLn2) < 1e-9);
  CHECK(pilot_delta_h(o, q, none) == 0.0);
}

TEST_CASE("entropy algebra on random demo sets") {
  std::mt19937_64 rng(3);
  std::vector<std::vector<std::string>> record_tokens;
  std::vector<std::string> texts;
  for (int v = 0; v < 12; ++v) {
    std::vector<std::string> toks;
    for (int t = 0; t < 4; ++t) toks.push_back("w" + std::to_string(rng() % 20));
    record_tokens.push_back(toks);
    texts.push_back(join(toks));
  }
  const Corpus c = fixtures::make_corpus(std::vector<std::vector<double>>(12, {1.0, 0.5}), texts);
  auto lm = std::make_shared<mock::AnalyticLM>();
  EntropyOracle cached(c, default_template(Task::kGeneric), lm, true);
  EntropyOracle uncached(c, default_template(Task::kGeneric), lm, false);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> qt;
    for (int t = 0; t < 6; ++t) qt.push_back("w" + std::to_string(rng() % 20));
    const Query q = text_query(join(qt));
    std::vector<NodeId> s(12);
    std::iota(s.begin(), s.end(), 0);
    std::shuffle(s.begin(), s.end(), rng);
    s.resize(1 + rng() % 4);

    CHECK(std::abs(cached.cond_entropy(q, s) - closed_form(qt, record_tokens, s)) < 1e-9);
    CHECK(cached.cond_entropy(q, s) == uncached.cond_entropy(q, s));

    std::sort(s.begin(), s.end());
    const double total = pilot_delta_h(cached, q, s);
    do {
      std::vector<NodeId> prefix;
      double sum = 0;
      for (NodeId v : s) {
        const double g = cached.marginal_gain(q, prefix, v);
        std::vector<NodeId> ext = prefix;
        ext.push_back(v);
        CHECK(std::abs(g - (cached.cond_entropy(q, prefix) - cached.cond_entropy(q, ext))) < 1e-9);
        sum += g;
        prefix = ext;
      }
      CHECK(std::abs(sum - total) < 1e-9);
    } while (std::next_permutation(s.begin(), s.end()));
  }
}

TEST_CASE("the NLL cache saves backend calls without changing values") {
  const Corpus c = fixtures::make_corpus({{1, 0}, {0, 1}, {1, 1}}, {"a b", "b c", "c d"});
  auto lm = std::make_shared<mock::AnalyticLM>();
  EntropyOracle cached(c, default_template(Task::kGeneric), lm, true);
  EntropyOracle uncached(c, default_template(Task::kGeneric), lm, false);
  const Query q = text_query("a c e");
  const std::vector<NodeId> s{0};
  for (int rep = 0; rep < 3; ++rep) {
    for (NodeId v : {1, 2}) CHECK(cached.marginal_gain(q, s, v) == uncached.marginal_gain(q, s, v));
  }
  CHECK(cached.backend_calls() == 6);  // H(S) plus H(S+v) for two v, two texts each
  CHECK(uncached.backend_calls() == 24);
}

TEST_CASE("score parser") {
  for (int v = 0; v <= 10; ++v) {
    CHECK(parse_score(std::to_string(v)) == v);
    CHECK(parse_score(" \t" + std::to_string(v) + "\n") == v);
  }
  for (const char* bad : {"", " ", "11", "-1", "Score: 7", "7.0", "07", "1 0", "seven", "100", "+3"}) {
    CHECK_FALSE(parse_score(bad).has_value());
  }
}

TEST_CASE("black-box scores echo a scripted table") {
  const Corpus c = fixtures::make_corpus(std::vector<std::vector<double>>(4, {1.0, 0.0}),
                                         {"rec-0", "rec-1", "rec-2", "rec-3"});
  const std::map<std::string, std::string> table{{"rec-0", "3"}, {"rec-1", "10"}, {"rec-2", "0"},
                                                 {"rec-3", " 6 "}};
  auto chat = std::make_shared<mock::ScriptedChat>([&](const std::string& prompt) {
    for (const auto& [k, v] : table) {
      if (prompt.find(k) != std::string::npos) return v;
    }
    return std::string("?");
  });
  BlackboxOracle o(c, default_template(Task::kGeneric), chat);
  const Query q = text_query("patient");
  const std::vector<NodeId> none;
  CHECK(o.marginal_gain(q, none, 0) == 3.0);
  CHECK(o.marginal_gain(q, none, 1) == 10.0);
  CHECK(o.marginal_gain(q, none, 2) == 0.0);
  CHECK(o.marginal_gain(q, none, 3) == 6.0);
  CHECK(chat->calls == 4);
  CHECK(o.diagnostics().empty());
}

TEST_CASE("black-box retry and failure paths") {
  const Corpus c = fixtures::make_corpus({{1, 0}}, {"rec"});
  std::vector<std::string> prompts;
  std::deque<std::string> replies{"Score: 11", "7", "nope", "still no"};
  auto chat = std::make_shared<mock::ScriptedChat>([&](const std::string& p) {
    prompts.push_back(p);
    auto r = replies.front();
    replies.pop_front();
    return r;
  });
  BlackboxOracle o(c, default_template(Task::kGeneric), chat);
  const Query q = text_query("patient");
  CHECK(o.score(q, {}, 0) == 7);
  REQUIRE(prompts.size() == 2);
  CHECK(prompts[1].find(BlackboxOracle::kReminder) != std::string::npos);
  CHECK(o.score(q, {}, 0) == 0);
  CHECK(o.diagnostics().size() == 1);
}

TEST_CASE("coverage oracle arithmetic") {
  // a=0, b=1, c=2
  CoverageOracle o({{0, 1}, {1, 2}, {2}}, {0, 1, 2});
  const Query q = text_query("x");
  const std::vector<NodeId> none;
  CHECK(o.marginal_gain(q, none, 0) == 2.0);
  CHECK(o.marginal_gain(q, none, 1) == 2.0);
  CHECK(o.marginal_gain(q, none, 2) == 1.0);
  CHECK(o.marginal_gain(q, std::vector<NodeId>{0}, 1) == 1.0);
  CHECK(o.marginal_gain(q, std::vector<NodeId>{1}, 2) == 0.0);
  CHECK(*o.cond_score(q, none) == 3.0);
  CHECK(pilot_delta_h(o, q, std::vector<NodeId>{0, 1}) == 3.0);
  CoverageOracle full({{0, 1, 2, 9}}, {0, 1, 2});
  CHECK(full.marginal_gain(q, none, 0) == 3.0);
  CHECK_THROWS_AS(CoverageOracle({{1}}, {}), ConfigError);
}

TEST_CASE("coverage oracle is monotone and submodular") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<int>> f(10);
    for (auto& s : f) {
      for (int k = 0; k < 5; ++k) s.push_back(static_cast<int>(rng() % 15));
    }
    std::vector<int> target;
    for (int k = 0; k < 15; ++k) {
      if (rng() % 3) target.push_back(k);
    }
    if (target.empty()) target.push_back(0);
    CoverageOracle o(f, target);
    const Query q = text_query("x");
    std::vector<NodeId> small{static_cast<NodeId>(rng() % 10)};
    std::vector<NodeId> large = small;
    for (int k = 0; k < 3; ++k) large.push_back(rng() % 10);
    for (NodeId v = 0; v < 10; ++v) {
      const double gs = o.marginal_gain(q, small, v);
      const double gl = o.marginal_gain(q, large, v);
      CHECK(gl >= 0.0);
      CHECK(gl <= gs);
    }
  }
}

TEST_CASE("feature extraction") {
  Corpus c = fixtures::make_corpus({{1, -1, 2}, {0, 3, 0}});
  const auto f = corpus_features(c);
  CHECK(f[0] == std::vector<int>{0, 2});
  CHECK(f[1] == std::vector<int>{1});
  Query q = fixtures::make_query({-1, 1, 1});
  CHECK(query_features(q) == std::vector<int>{1, 2});
  q.features = std::vector<int>{7};
  CHECK(query_features(q) == std::vector<int>{7});
}
