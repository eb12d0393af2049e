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

// Domain types, embedding ingestion and the cosine similarity primitive.

#ifndef DEMOSEL_CORE_HPP_
#define DEMOSEL_CORE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace demosel {

/// Index of a record inside its corpus; also the node id in the graph.
using NodeId = std::size_t;

using Vector = Eigen::VectorXd;

/// Binary or categorical class (integer), a real-valued target, or free text.
using Label = std::variant<std::int64_t, double, std::string>;

std::string label_to_string(const Label& label);

struct InstanceRecord {
  std::string id;
  Vector embedding;
  Label label;
  std::string record_text;
  // Optional synthetic feature set consumed by the coverage oracle.
  std::optional<std::vector<int>> features;
  // Extra string-valued keys from the input line (e.g. "length").
  std::map<std::string, std::string> metadata;
};

struct Query {
  std::string id;
  Vector embedding;
  std::string record_text;
  std::optional<Label> label;
  std::optional<std::vector<int>> features;
  std::map<std::string, std::string> metadata;
};

/// Immutable, dimension-checked collection of records.
class Corpus {
 public:
  Corpus() = default;
  /// Validates uniform dimension, finite values and unique ids.
  explicit Corpus(std::vector<InstanceRecord> records);

  std::size_t size() const { return records_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return records_.empty(); }
  const InstanceRecord& operator[](NodeId i) const { return records_[i]; }
  const std::vector<InstanceRecord>& records() const { return records_; }
  std::optional<NodeId> find(std::string_view id) const;

  /// Stable content hash over ids, vectors, labels and record text.
  const std::string& content_hash() const { return hash_; }

 private:
  std::vector<InstanceRecord> records_;
  std::unordered_map<std::string, NodeId> index_;
  std::size_t dim_ = 0;
  std::string hash_;
};

/// Cosine similarity with the zero-norm convention made explicit.
struct Similarity {
  double value = 0.0;
  bool degenerate = false;  // one of the inputs had zero norm
};

template <typename DerivedA, typename DerivedB>
Similarity cosine_sim_checked(const Eigen::MatrixBase<DerivedA>& a,
                              const Eigen::MatrixBase<DerivedB>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  return {a.dot(b) / (na * nb), false};
}

/// a·b / (‖a‖‖b‖); zero when either vector has zero norm.
template <typename DerivedA, typename DerivedB>
double cosine_sim(const Eigen::MatrixBase<DerivedA>& a,
                  const Eigen::MatrixBase<DerivedB>& b) {
  return cosine_sim_checked(a, b).value;
}

// Same formula as cosine_sim with the norms supplied by the caller, so bulk
// computations are bit-identical to pairwise calls.
template <typename DerivedA, typename DerivedB>
double cosine_sim_prenormed(const Eigen::MatrixBase<DerivedA>& a, double na,
                            const Eigen::MatrixBase<DerivedB>& b, double nb) {
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

// ---------------------------------------------------------------------------
// JSONL ingestion. One record per line:
//   {"id": str, "vector": [num...], "label": str|num, "record": str}
// Optional keys: "features" ([int...]) and any string/number metadata.

Corpus ingest_corpus(const std::string& path);
Corpus parse_corpus(std::string_view jsonl, std::string_view source = "<memory>");

/// Queries use the corpus schema with an optional label.
std::vector<Query> ingest_queries(const std::string& path,
                                  std::optional<std::size_t> expected_dim = {});
std::vector<Query> parse_queries(std::string_view jsonl,
                                 std::optional<std::size_t> expected_dim = {},
                                 std::string_view source = "<memory>");

std::string serialize_corpus(const Corpus& corpus);
std::string serialize_queries(std::span<const Query> queries);
void write_text_file(const std::string& path, std::string_view contents);
std::string read_text_file(const std::string& path);

/// Converts a corpus record into a query (used by harness and tests).
Query query_from_record(const InstanceRecord& record);

}  // namespace demosel

#endif  // DEMOSEL_CORE_HPP_
