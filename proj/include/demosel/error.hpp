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

// Error types shared across the library. Each carries the process exit code
// the command-line tool reports for it.

#ifndef DEMOSEL_ERROR_HPP_
#define DEMOSEL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace demosel {

enum class ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kOracleError = 3,
  kInternalError = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::kInternalError; }
};

// Malformed or inconsistent input files, bad arguments, hash mismatches.
class InputError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kInputError; }
};

// Corpus records disagree with each other (dimension, duplicate ids).
class CorpusInconsistentError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class InvalidNodeError : public InputError {
 public:
  using InputError::InputError;
};

class TemplateError : public InputError {
 public:
  using InputError::InputError;
};

// Raised by metrics when the label vector has a single class.
class UndefinedMetricError : public InputError {
 public:
  using InputError::InputError;
};

// Modularity of a graph without edges.
class UndefinedModularityError : public InputError {
 public:
  using InputError::InputError;
};

// Transport failure after all retries were spent.
class OracleUnavailableError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kOracleError; }
};

// The backend answered, but not in the shape we asked for.
class ProtocolError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kOracleError; }
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace demosel

#endif  // DEMOSEL_ERROR_HPP_
