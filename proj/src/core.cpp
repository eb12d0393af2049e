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

#include "demosel/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "demosel/error.hpp"
#include "demosel/hash.hpp"
#include "json.hpp"

namespace demosel {

using nlohmann::ordered_json;

std::string label_to_string(const Label& label) {
  if (const auto* i = std::get_if<std::int64_t>(&label)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&label)) {
    ordered_json j = *d;
    return j.dump();
  }
  return std::get<std::string>(label);
}

Corpus::Corpus(std::vector<InstanceRecord> records) : records_(std::move(records)) {
  if (!records_.empty()) dim_ = static_cast<std::size_t>(records_.front().embedding.size());
  ContentHasher hasher;
  hasher.add(static_cast<std::uint64_t>(records_.size()));
  hasher.add(static_cast<std::uint64_t>(dim_));
  for (NodeId i = 0; i < records_.size(); ++i) {
    const InstanceRecord& r = records_[i];
    if (static_cast<std::size_t>(r.embedding.size()) != dim_) {
      throw CorpusInconsistentError(
          "record '" + r.id + "' (index " + std::to_string(i) + ") has dimension " +
          std::to_string(r.embedding.size()) + ", expected " + std::to_string(dim_));
    }
    if (!r.embedding.allFinite()) {
      throw CorpusInconsistentError("record '" + r.id + "' has a non-finite embedding value");
    }
    if (!index_.emplace(r.id, i).second) {
      throw CorpusInconsistentError("duplicate record id '" + r.id + "'");
    }
    hasher.add(r.id);
    for (Eigen::Index k = 0; k < r.embedding.size(); ++k) hasher.add(r.embedding[k]);
    hasher.add(static_cast<std::uint64_t>(r.label.index()));
    hasher.add(label_to_string(r.label));
    hasher.add(r.record_text);
  }
  hash_ = hasher.hex();
}

std::optional<NodeId> Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct ParsedLine {
  std::size_t line_no = 0;
  std::string id;
  Vector embedding;
  std::optional<Label> label;
  std::string record_text;
  std::optional<std::vector<int>> features;
  std::map<std::string, std::string> metadata;
};

std::string where(std::string_view source, std::size_t line_no) {
  return std::string(source) + ":" + std::to_string(line_no);
}

Label parse_label(const ordered_json& j, std::string_view source, std::size_t line_no) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InputError(where(source, line_no) + ": non-finite label");
    return v;
  }
  if (j.is_string()) return j.get<std::string>();
  throw InputError(where(source, line_no) + ": label must be a string or a number");
}

std::vector<ParsedLine> parse_lines(std::string_view jsonl, std::string_view source,
                                    bool label_required) {
  std::vector<ParsedLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == jsonl.size()) break;
      continue;
    }

    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
      // Overflowing numbers such as 1e999 land here as out_of_range.
      throw InputError(where(source, line_no) + ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw InputError(where(source, line_no) + ": expected a JSON object");

    ParsedLine p;
    p.line_no = line_no;
    if (!j.contains("id") || !j["id"].is_string()) {
      throw InputError(where(source, line_no) + ": missing string field 'id'");
    }
    p.id = j["id"].get<std::string>();
    if (!j.contains("vector") || !j["vector"].is_array()) {
      throw InputError(where(source, line_no) + ": missing array field 'vector'");
    }
    const auto& vec = j["vector"];
    p.embedding.resize(static_cast<Eigen::Index>(vec.size()));
    for (std::size_t k = 0; k < vec.size(); ++k) {
      if (!vec[k].is_number()) {
        throw InputError(where(source, line_no) + ": vector entry " + std::to_string(k) +
                         " of '" + p.id + "' is not a finite number");
      }
      const double v = vec[k].get<double>();
      if (!std::isfinite(v)) {
        throw InputError(where(source, line_no) + ": vector entry " + std::to_string(k) +
                         " of '" + p.id + "' is not a finite number");
      }
      p.embedding[static_cast<Eigen::Index>(k)] = v;
    }
    if (j.contains("label") && !j["label"].is_null()) {
      p.label = parse_label(j["label"], source, line_no);
    } else if (label_required) {
      throw InputError(where(source, line_no) + ": missing field 'label'");
    }
    if (!j.contains("record") || !j["record"].is_string()) {
      throw InputError(where(source, line_no) + ": missing string field 'record'");
    }
    p.record_text = j["record"].get<std::string>();
    if (j.contains("features")) {
      const auto& f = j["features"];
      if (!f.is_array()) throw InputError(where(source, line_no) + ": 'features' must be an array");
      std::vector<int> features;
      for (const auto& x : f) {
        if (!x.is_number_integer()) {
          throw InputError(where(source, line_no) + ": 'features' entries must be integers");
        }
        features.push_back(x.get<int>());
      }
      p.features = std::move(features);
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "id" || key == "vector" || key == "label" || key == "record" ||
          key == "features") {
        continue;
      }
      p.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    out.push_back(std::move(p));
    if (end == jsonl.size()) break;
  }
  return out;
}

// Uniform dimension and unique ids, with line numbers in the messages.
void check_consistency(const std::vector<ParsedLine>& lines, std::string_view source,
                       std::optional<std::size_t> expected_dim) {
  std::optional<std::size_t> dim = expected_dim;
  std::unordered_map<std::string, std::size_t> seen;
  for (const ParsedLine& p : lines) {
    const auto d = static_cast<std::size_t>(p.embedding.size());
    if (!dim) dim = d;
    if (d != *dim) {
      throw CorpusInconsistentError(where(source, p.line_no) + ": record '" + p.id +
                                    "' has dimension " + std::to_string(d) + ", expected " +
                                    std::to_string(*dim));
    }
    auto [it, inserted] = seen.emplace(p.id, p.line_no);
    if (!inserted) {
      throw CorpusInconsistentError(where(source, p.line_no) + ": duplicate id '" + p.id +
                                    "' (first seen on line " + std::to_string(it->second) + ")");
    }
  }
}

ordered_json label_json(const Label& label) {
  if (const auto* i = std::get_if<std::int64_t>(&label)) return *i;
  if (const auto* d = std::get_if<double>(&label)) return *d;
  return std::get<std::string>(label);
}

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

void put_extras(ordered_json& j, const std::optional<std::vector<int>>& features,
                const std::map<std::string, std::string>& metadata) {
  if (features) j["features"] = *features;
  for (const auto& [k, v] : metadata) j[k] = v;
}

}  // namespace

Corpus parse_corpus(std::string_view jsonl, std::string_view source) {
  auto lines = parse_lines(jsonl, source, /*label_required=*/true);
  check_consistency(lines, source, std::nullopt);
  std::vector<InstanceRecord> records;
  records.reserve(lines.size());
  for (ParsedLine& p : lines) {
    records.push_back(InstanceRecord{std::move(p.id), std::move(p.embedding), std::move(*p.label),
                                     std::move(p.record_text), std::move(p.features),
                                     std::move(p.metadata)});
  }
  return Corpus(std::move(records));
}

std::vector<Query> parse_queries(std::string_view jsonl, std::optional<std::size_t> expected_dim,
                                 std::string_view source) {
  auto lines = parse_lines(jsonl, source, /*label_required=*/false);
  check_consistency(lines, source, expected_dim);
  std::vector<Query> out;
  out.reserve(lines.size());
  for (ParsedLine& p : lines) {
    out.push_back(Query{std::move(p.id), std::move(p.embedding), std::move(p.record_text),
                        std::move(p.label), std::move(p.features), std::move(p.metadata)});
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("failed writing '" + path + "'");
}

Corpus ingest_corpus(const std::string& path) { return parse_corpus(read_text_file(path), path); }

std::vector<Query> ingest_queries(const std::string& path, std::optional<std::size_t> expected_dim) {
  return parse_queries(read_text_file(path), expected_dim, path);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const InstanceRecord& r : corpus.records()) {
    ordered_json j;
    j["id"] = r.id;
    j["vector"] = vector_json(r.embedding);
    j["label"] = label_json(r.label);
    j["record"] = r.record_text;
    put_extras(j, r.features, r.metadata);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string serialize_queries(std::span<const Query> queries) {
  std::string out;
  for (const Query& q : queries) {
    ordered_json j;
    j["id"] = q.id;
    j["vector"] = vector_json(q.embedding);
    if (q.label) j["label"] = label_json(*q.label);
    j["record"] = q.record_text;
    put_extras(j, q.features, q.metadata);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Query query_from_record(const InstanceRecord& record) {
  return Query{record.id, record.embedding, record.record_text, record.label, record.features,
               record.metadata};
}

}  // namespace demosel
