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

#ifndef DEMOSEL_HASH_HPP_
#define DEMOSEL_HASH_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace demosel {

// 64-bit FNV-1a. Used to tie persisted artifacts to their inputs, not for
// anything adversarial.
class ContentHasher {
 public:
  ContentHasher& add(std::string_view bytes);
  ContentHasher& add(std::uint64_t value);
  ContentHasher& add(double value);  // hashes the bit pattern
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace demosel

#endif  // DEMOSEL_HASH_HPP_
