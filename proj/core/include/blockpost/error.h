// Copyright 2026 The blockpost Authors.
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

#ifndef BLOCKPOST_ERROR_H_
#define BLOCKPOST_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockpost {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kInvalidArgument,   // malformed input, dimension mismatch, bad bounds
  kTheoryViolation,   // a theorem precondition fails (eta range, assumptions)
  kCapExceeded,       // enumeration or permutation cap
  kIo,                // file or parse failure
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void ThrowInvalid(const std::string& message);
[[noreturn]] void ThrowTheory(const std::string& message);
[[noreturn]] void ThrowCap(const std::string& message);
[[noreturn]] void ThrowIo(const std::string& message);

}  // namespace blockpost

#endif  // BLOCKPOST_ERROR_H_
