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

// OpenAI-compatible HTTP clients: echo-logprobs completions for the entropy
// oracle, chat completions for the black-box scorer.

#ifndef DEMOSEL_LM_BACKEND_HPP_
#define DEMOSEL_LM_BACKEND_HPP_

#include <chrono>
#include <string>

#include "demosel/gain.hpp"

namespace demosel {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";  // http only
  std::string model = "default";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 60.0;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};  // doubles after each failure
};

/// POST {base}/v1/completions with
///   {"model", "prompt", "max_tokens": 0, "echo": true, "logprobs": 1}
/// and sums −logprob over the echoed prompt tokens. The leading token, which
/// servers report with a null logprob, contributes nothing.
class HttpLogprobBackend : public LogprobBackend {
 public:
  explicit HttpLogprobBackend(EndpointConfig config);
  TokenLoss score(const std::string& text) override;

 private:
  EndpointConfig config_;
};

/// POST {base}/v1/chat/completions; returns choices[0].message.content.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(EndpointConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  EndpointConfig config_;
};

/// Parses a completions response body into a TokenLoss. Throws ProtocolError
/// when logprobs or offsets are missing or malformed.
TokenLoss parse_completions_logprobs(const std::string& body);

/// Extracts choices[0].message.content. Throws ProtocolError.
std::string parse_chat_content(const std::string& body);

}  // namespace demosel

#endif  // DEMOSEL_LM_BACKEND_HPP_
