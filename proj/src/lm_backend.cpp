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

#include "demosel/lm_backend.hpp"

#include <cstdlib>
#include <thread>

#include "demosel/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace demosel {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw ConfigError("endpoint '" + url + "' must be an http:// URL");
  }
  const auto slash = url.find('/', scheme.size());
  ParsedUrl out;
  out.origin = url.substr(0, slash);
  if (slash != std::string::npos) out.prefix = url.substr(slash);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

// Posts JSON with bounded retries. Any transport error or non-200 status is
// retried; exhausting the attempts raises OracleUnavailableError.
std::string post_json(const EndpointConfig& cfg, const std::string& path,
                      const nlohmann::json& body) {
  const ParsedUrl url = parse_base_url(cfg.base_url);
  httplib::Headers headers;
  if (!cfg.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string payload = body.dump();
  const auto secs = static_cast<time_t>(cfg.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(secs)) * 1e6);

  std::string last_error;
  auto backoff = cfg.backoff_base;
  const int attempts = std::max(1, cfg.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(url.origin);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(url.prefix + path, headers, payload, "application/json");
    if (res && res->status == 200) return res->body;
    last_error = res ? "HTTP " + std::to_string(res->status)
                     : "transport error: " + httplib::to_string(res.error());
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw OracleUnavailableError(cfg.base_url + path + " unavailable after " +
                               std::to_string(attempts) + " attempt(s): " + last_error);
}

nlohmann::json parse_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
}

}  // namespace

TokenLoss parse_completions_logprobs(const std::string& body) {
  const nlohmann::json j = parse_body(body);
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw ProtocolError("completions response has no choices");
  }
  const auto& choice = j["choices"][0];
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) {
    throw ProtocolError("completions response carries no logprobs");
  }
  const auto& lp = choice["logprobs"];
  if (!lp.contains("token_logprobs") || !lp["token_logprobs"].is_array()) {
    throw ProtocolError("completions response carries no token_logprobs");
  }
  if (!lp.contains("text_offset") || !lp["text_offset"].is_array()) {
    throw ProtocolError("completions response carries no text_offset");
  }
  const auto& values = lp["token_logprobs"];
  const auto& offsets = lp["text_offset"];
  if (values.size() != offsets.size()) {
    throw ProtocolError("token_logprobs and text_offset differ in length");
  }
  TokenLoss loss;
  long long previous = -1;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!offsets[k].is_number_integer()) throw ProtocolError("text_offset entry is not an integer");
    const long long off = offsets[k].get<long long>();
    if (off < previous) throw ProtocolError("text_offset is not non-decreasing");
    previous = off;
    ++loss.token_count;
    if (values[k].is_null()) continue;
    if (!values[k].is_number()) throw ProtocolError("token logprob is not a number");
    const double v = values[k].get<double>();
    if (v > 1e-12) throw ProtocolError("token logprob is positive");
    loss.total_nll -= v;
  }
  if (loss.total_nll < 0.0) loss.total_nll = 0.0;
  return loss;
}

std::string parse_chat_content(const std::string& body) {
  const nlohmann::json j = parse_body(body);
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw ProtocolError("chat response has no choices");
  }
  const auto& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw ProtocolError("chat response has no message content");
  }
  return choice["message"]["content"].get<std::string>();
}

HttpLogprobBackend::HttpLogprobBackend(EndpointConfig config) : config_(std::move(config)) {
  parse_base_url(config_.base_url);
}

TokenLoss HttpLogprobBackend::score(const std::string& text) {
  if (text.empty()) return {};
  nlohmann::json body = {{"model", config_.model}, {"prompt", text}, {"max_tokens", 0},
                         {"echo", true},           {"logprobs", 1}};
  return parse_completions_logprobs(post_json(config_, "/v1/completions", body));
}

HttpChatBackend::HttpChatBackend(EndpointConfig config) : config_(std::move(config)) {
  parse_base_url(config_.base_url);
}

std::string HttpChatBackend::complete(const std::string& prompt) {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"max_tokens", 8},
      {"temperature", 0}};
  return parse_chat_content(post_json(config_, "/v1/chat/completions", body));
}

}  // namespace demosel
