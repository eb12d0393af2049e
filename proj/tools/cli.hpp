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

// Command-line entry point, callable in-process for tests.

#ifndef DEMOSEL_TOOLS_CLI_HPP_
#define DEMOSEL_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace demosel {

/// Runs `demosel <args...>` and returns the process exit code: 0 success,
/// 2 input or configuration error, 3 oracle or transport failure, 4
/// internal error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace demosel

#endif  // DEMOSEL_TOOLS_CLI_HPP_
