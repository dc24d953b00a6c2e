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

#include "blockpost/error.h"

namespace blockpost {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid_argument";
    case ErrorKind::kTheoryViolation:
      return "theory_violation";
    case ErrorKind::kCapExceeded:
      return "cap_exceeded";
    case ErrorKind::kIo:
      return "io_error";
  }
  return "unknown";
}

void ThrowInvalid(const std::string& message) {
  throw Error(ErrorKind::kInvalidArgument, message);
}
void ThrowTheory(const std::string& message) {
  throw Error(ErrorKind::kTheoryViolation, message);
}
void ThrowCap(const std::string& message) {
  throw Error(ErrorKind::kCapExceeded, message);
}
void ThrowIo(const std::string& message) {
  throw Error(ErrorKind::kIo, message);
}

}  // namespace blockpost
