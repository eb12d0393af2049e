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

// Zero-/few-shot prompt assembly and parsing of model replies.
//
// Templates use `{NAME}` placeholders (upper-case letters, digits and
// underscores). Substituted values are inserted verbatim and never
// re-scanned, so record text may itself contain braces.

#ifndef DEMOSEL_PROMPTS_HPP_
#define DEMOSEL_PROMPTS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "demosel/core.hpp"

namespace demosel {

enum class Task { kMortality, kReadmission, kLos, kGeneric };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

struct PromptTemplate {
  Task task = Task::kGeneric;
  // Shared header. Placeholders: LENGTH, RECORD_TIME_LIST, TASK_DESCRIPTION,
  // RESPONSE_FORMAT.
  std::string preamble;
  std::string examples_header;
  // Placeholders: INDEX, RECORD, LABEL.
  std::string example_block_format;
  // Placeholder: RECORD. Used when demonstrations are present.
  std::string target_block_format;
  // Placeholder: RECORD. Used for the zero-shot form.
  std::string zero_shot_target_format;
  std::string task_description;
  std::string response_format;
  // Self-evaluation prompt. Placeholders: TASK_DESCRIPTION,
  // SELECTED_EXAMPLES, CANDIDATE_EXAMPLE, TEST_PATIENT_DETAIL.
  std::string scoring_format;
};

PromptTemplate default_template(Task task);

/// Reads the template files from `dir` (the layout of the shipped
/// `templates/` directory).
PromptTemplate load_template(Task task, const std::string& dir);

using PromptFields = std::map<std::string, std::string, std::less<>>;

/// Replaces every `{NAME}` in `text`; an unknown name is a TemplateError.
std::string substitute(std::string_view text, const PromptFields& fields);

/// A prompt split around the query record: text() == head + query + tail.
struct RenderedPrompt {
  std::string head;
  std::string query;
  std::string tail;

  std::string text() const { return head + query + tail; }
};

/// `demos` are corpus indices in presentation order. `extra` overrides the
/// values derived from the query (LENGTH, RECORD_TIME_LIST from metadata
/// keys "length" and "record_times").
RenderedPrompt render_parts(const PromptTemplate& tmpl, const Query& query, const Corpus& corpus,
                            std::span<const NodeId> demos, const PromptFields& extra = {});

std::string render(const PromptTemplate& tmpl, const Query& query, const Corpus& corpus,
                   std::span<const NodeId> demos, const PromptFields& extra = {});

/// Self-evaluation prompt asking for a 0-10 usefulness score of `candidate`
/// given the already selected demonstrations.
std::string render_scoring_prompt(const PromptTemplate& tmpl, const Query& query,
                                  const Corpus& corpus, std::span<const NodeId> selected,
                                  NodeId candidate);

/// Rough token count (about four characters per token) for budgeting.
std::size_t estimate_tokens(std::string_view text);

struct Prediction {
  Task task = Task::kGeneric;
  double probability = 0.0;  // mortality / readmission
  int class_index = 0;       // los: A=0 .. D=3
  std::string text;          // generic
  bool parse_failed = false;
  std::string diagnostic;
};

struct ParseDefaults {
  double binary = 0.5;
  int los_class = 0;
};

/// Whitespace-tolerant parse of a model reply. Failures yield the default
/// value with parse_failed set.
Prediction parse_prediction(Task task, std::string_view reply, const ParseDefaults& defaults = {});

/// Canonical reply text for a value (4 decimals for probabilities, a letter
/// for length of stay).
std::string format_prediction(const Prediction& prediction);

}  // namespace demosel

#endif  // DEMOSEL_PROMPTS_HPP_
