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

// Small corpus builders shared by the unit and acceptance tests.

#ifndef DEMOSEL_TESTS_FIXTURES_HPP_
#define DEMOSEL_TESTS_FIXTURES_HPP_

#include <random>
#include <string>
#include <vector>

#include "brute.hpp"
#include "demosel/core.hpp"

namespace fixtures {

inline demosel::Corpus make_corpus(const std::vector<std::vector<double>>& vectors,
                                   const std::vector<std::string>& texts = {}) {
  std::vector<demosel::InstanceRecord> records;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    demosel::InstanceRecord r;
    r.id = std::to_string(i);
    r.embedding = Eigen::Map<const Eigen::VectorXd>(vectors[i].data(),
                                                    static_cast<Eigen::Index>(vectors[i].size()));
    r.label = static_cast<std::int64_t>(i % 2);
    r.record_text = i < texts.size() ? texts[i] : "record " + std::to_string(i);
    records.push_back(std::move(r));
  }
  return demosel::Corpus(std::move(records));
}

// Gaussian vectors; a share of them are exact copies of earlier ones so the
// tie rule is exercised.
inline std::vector<std::vector<double>> random_vectors(std::size_t n, std::size_t dim,
                                                       std::uint64_t seed,
                                                       double duplicate_share = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && u01(rng) < duplicate_share) {
      out.push_back(out[rng() % i]);
      continue;
    }
    std::vector<double> v(dim);
    for (double& x : v) x = n01(rng);
    out.push_back(std::move(v));
  }
  return out;
}

inline demosel::Query make_query(const std::vector<double>& v, std::string text = "query") {
  demosel::Query q;
  q.id = "q";
  q.embedding = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  q.record_text = std::move(text);
  return q;
}

}  // namespace fixtures

#endif  // DEMOSEL_TESTS_FIXTURES_HPP_
