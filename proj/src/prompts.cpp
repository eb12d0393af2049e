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

#include "demosel/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "demosel/error.hpp"

namespace demosel {

namespace {

constexpr const char* kPreamble = R"TXT(You will be provided with longitudinal electronic health record (EHR) data for a single patient.
Each clinical feature is represented as a time-ordered list of measurements corresponding to the same hospital stay.
Missing values are denoted as NaN. Units and reference ranges are provided where applicable.

Patient Information:
- Number of measurements: {LENGTH}
- Measurement times (hours since admission): [{RECORD_TIME_LIST}]

Task Description:
{TASK_DESCRIPTION}

Instructions & Output Format:
{RESPONSE_FORMAT})TXT";

constexpr const char* kExamplesHeader = R"TXT(In-context Examples:
Below are example patient records and their corresponding labels. These examples are provided to guide the prediction for the target patient.)TXT";

constexpr const char* kExampleBlock = R"TXT(Example {INDEX}:
Clinical Features: {RECORD}
Label: {LABEL})TXT";

constexpr const char* kTargetBlock = R"TXT(Target Patient:

Clinical Features Over Time:
{RECORD}

Your Answer:)TXT";

constexpr const char* kZeroShotTarget = R"TXT(Clinical Features Over Time:
{RECORD}

Your Answer:)TXT";

constexpr const char* kScoring = R"TXT(You are evaluating whether a candidate patient example would be helpful for predicting a test patient's clinical outcome.

Task:
{TASK_DESCRIPTION}

Already Selected Examples for In-Context Learning:
{SELECTED_EXAMPLES}

Candidate Example to Evaluate:
{CANDIDATE_EXAMPLE}

Test Patient to Predict:
{TEST_PATIENT_DETAIL}

Instruction:
Rate how much additional useful information the candidate example provides for predicting the test patient's outcome, considering:
- Clinical similarity or complementarity to the test patient
- Whether it provides new information not already covered by selected examples
- How much it would help reduce uncertainty about the test patient's outcome

Score Definition (0-10):
- 0: completely redundant or irrelevant
- 5: moderately helpful, provides some new perspective
- 10: extremely informative, highly relevant and complementary

Output Format:
Output ONLY a single integer score from 0 to 10, and nothing else.)TXT";

struct TaskText {
  const char* description;
  const char* format;
};

TaskText task_text(Task task) {
  switch (task) {
    case Task::kMortality:
      return {R"TXT(You are tasked with predicting in-hospital mortality based on patient EHR data.)TXT",
              R"TXT(Provide only a floating-point number between 0 and 1 representing the predicted probability of mortality (a higher value indicates a higher likelihood of death).
Do not provide any reasoning, explanation, or additional text. Output only the numerical value.
Example: 0.XX)TXT"};
    case Task::kReadmission:
      return {R"TXT(You are tasked with predicting whether a patient will be readmitted within 30 days after hospital discharge based on EHR data.)TXT",
              R"TXT(Provide only a floating-point number between 0 and 1 representing the predicted probability of 30-day readmission after discharge (including cases where the patient dies within 30 days, which are counted as readmission events).
Do not provide any reasoning, explanation, or additional text. Output only the numerical value.
Example: 0.XX)TXT"};
    case Task::kLos:
      return {R"TXT(You are tasked with predicting the patient's length of hospital stay based on EHR data.)TXT",
              R"TXT(Provide only a single letter (A, B, C, or D) representing the predicted length-of-stay category:
- A: Less than 3 days (<3 days)
- B: 3 to 7 days (3-7 days)
- C: 7 to 14 days (7-14 days)
- D: More than 14 days (>14 days)
Do not provide any reasoning, explanation, or additional text. Output only the letter (A, B, C, or D).
Example: B)TXT"};
    case Task::kGeneric:
      break;
  }
  return {R"TXT(You are tasked with predicting the label of the target record based on its features.)TXT",
          R"TXT(Provide only the predicted label, in the same form as the example labels.
Do not provide any reasoning, explanation, or additional text.)TXT"};
}

bool is_placeholder_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

PromptFields base_fields(const PromptTemplate& tmpl, const Query& query) {
  PromptFields f;
  auto meta = [&](const char* key) {
    auto it = query.metadata.find(key);
    return it == query.metadata.end() ? std::string("N/A") : it->second;
  };
  f["LENGTH"] = meta("length");
  f["RECORD_TIME_LIST"] = meta("record_times");
  f["TASK_DESCRIPTION"] = tmpl.task_description;
  f["RESPONSE_FORMAT"] = tmpl.response_format;
  return f;
}

std::string example_block(const PromptTemplate& tmpl, std::size_t index,
                          const InstanceRecord& record) {
  PromptFields f;
  f["INDEX"] = std::to_string(index);
  f["RECORD"] = record.record_text;
  f["LABEL"] = label_to_string(record.label);
  return substitute(tmpl.example_block_format, f);
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kMortality:
      return "mortality";
    case Task::kReadmission:
      return "readmission";
    case Task::kLos:
      return "los";
    case Task::kGeneric:
      break;
  }
  return "generic";
}

Task parse_task(std::string_view name) {
  if (name == "mortality") return Task::kMortality;
  if (name == "readmission") return Task::kReadmission;
  if (name == "los") return Task::kLos;
  if (name == "generic") return Task::kGeneric;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

PromptTemplate default_template(Task task) {
  const TaskText text = task_text(task);
  PromptTemplate t;
  t.task = task;
  t.preamble = kPreamble;
  t.examples_header = kExamplesHeader;
  t.example_block_format = kExampleBlock;
  t.target_block_format = kTargetBlock;
  t.zero_shot_target_format = kZeroShotTarget;
  t.task_description = text.description;
  t.response_format = text.format;
  t.scoring_format = kScoring;
  return t;
}

PromptTemplate load_template(Task task, const std::string& dir) {
  auto read = [&](const std::string& name) {
    return strip_trailing_newlines(read_text_file(dir + "/" + name));
  };
  const std::string task_name(to_string(task));
  PromptTemplate t;
  t.task = task;
  t.preamble = read("preamble.txt");
  t.examples_header = read("examples_header.txt");
  t.example_block_format = read("example_block.txt");
  t.target_block_format = read("target_block.txt");
  t.zero_shot_target_format = read("zero_shot_target.txt");
  t.task_description = read("tasks/" + task_name + ".description.txt");
  t.response_format = read("tasks/" + task_name + ".format.txt");
  t.scoring_format = read("scoring.txt");
  return t;
}

std::string substitute(std::string_view text, const PromptFields& fields) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_placeholder_char(text[j])) ++j;
      if (j < text.size() && text[j] == '}' && j > i + 1) {
        const std::string_view name = text.substr(i + 1, j - i - 1);
        auto it = fields.find(name);
        if (it == fields.end()) {
          throw TemplateError("unresolved placeholder {" + std::string(name) + "}");
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

RenderedPrompt render_parts(const PromptTemplate& tmpl, const Query& query, const Corpus& corpus,
                            std::span<const NodeId> demos, const PromptFields& extra) {
  PromptFields fields = base_fields(tmpl, query);
  for (const auto& [k, v] : extra) fields[k] = v;

  RenderedPrompt out;
  out.head = substitute(tmpl.preamble, fields);
  out.head += "\n\n";
  if (!demos.empty()) {
    out.head += tmpl.examples_header;
    out.head += "\n\n";
    for (std::size_t k = 0; k < demos.size(); ++k) {
      if (demos[k] >= corpus.size()) {
        throw InvalidNodeError("demonstration " + std::to_string(demos[k]) + " outside corpus");
      }
      out.head += example_block(tmpl, k + 1, corpus[demos[k]]);
      out.head += "\n\n";
    }
  }

  // Split the target block at its record slot so callers can score the
  // query span on its own.
  const std::string& target = demos.empty() ? tmpl.zero_shot_target_format : tmpl.target_block_format;
  const auto slot = target.find("{RECORD}");
  if (slot == std::string::npos) throw TemplateError("target block has no {RECORD} placeholder");
  out.head += substitute(std::string_view(target).substr(0, slot), fields);
  out.query = query.record_text;
  out.tail = substitute(std::string_view(target).substr(slot + 8), fields);
  return out;
}

std::string render(const PromptTemplate& tmpl, const Query& query, const Corpus& corpus,
                   std::span<const NodeId> demos, const PromptFields& extra) {
  return render_parts(tmpl, query, corpus, demos, extra).text();
}

std::string render_scoring_prompt(const PromptTemplate& tmpl, const Query& query,
                                  const Corpus& corpus, std::span<const NodeId> selected,
                                  NodeId candidate) {
  if (candidate >= corpus.size()) throw InvalidNodeError("candidate outside corpus");
  std::string examples;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (k > 0) examples += "\n\n";
    examples += example_block(tmpl, k + 1, corpus[selected[k]]);
  }
  if (examples.empty()) examples = "(none)";
  const InstanceRecord& c = corpus[candidate];
  PromptFields f;
  f["TASK_DESCRIPTION"] = tmpl.task_description;
  f["SELECTED_EXAMPLES"] = examples;
  f["CANDIDATE_EXAMPLE"] = "Clinical Features: " + c.record_text + "\nLabel: " + label_to_string(c.label);
  f["TEST_PATIENT_DETAIL"] = "Clinical Features: " + query.record_text;
  return substitute(tmpl.scoring_format, f);
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

Prediction parse_prediction(Task task, std::string_view reply, const ParseDefaults& defaults) {
  Prediction p;
  p.task = task;
  const std::string_view s = trim(reply);
  auto fail = [&](std::string why) {
    p.parse_failed = true;
    p.diagnostic = std::move(why);
    p.probability = defaults.binary;
    p.class_index = defaults.los_class;
    return p;
  };
  switch (task) {
    case Task::kMortality:
    case Task::kReadmission: {
      double v = 0.0;
      const char* end = s.data() + s.size();
      auto [ptr, ec] = std::from_chars(s.data(), end, v);
      if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        return fail("not a number: '" + std::string(s) + "'");
      }
      if (v < 0.0 || v > 1.0) return fail("probability outside [0,1]: '" + std::string(s) + "'");
      p.probability = v;
      return p;
    }
    case Task::kLos:
      if (s.size() != 1 || s[0] < 'A' || s[0] > 'D') {
        return fail("expected one of A, B, C, D: '" + std::string(s) + "'");
      }
      p.class_index = s[0] - 'A';
      return p;
    case Task::kGeneric:
      break;
  }
  if (s.empty()) return fail("empty reply");
  p.text = std::string(s);
  return p;
}

std::string format_prediction(const Prediction& prediction) {
  switch (prediction.task) {
    case Task::kMortality:
    case Task::kReadmission: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", prediction.probability);
      return buf;
    }
    case Task::kLos:
      return std::string(1, static_cast<char>('A' + prediction.class_index));
    case Task::kGeneric:
      break;
  }
  return prediction.text;
}

}  // namespace demosel
