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

#ifndef BLOCKPOST_TOOLS_CLI_H_
#define BLOCKPOST_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "blockpost/error.h"

namespace blockpost::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// "blockpost <version> (schema <n>)".
std::string VersionString();

// 0 ok, 1 usage or input error, 2 theory precondition, 3 resource cap.
int ExitCodeFor(ErrorKind kind);

// Runs one command line. args[0] is the program name.
int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace blockpost::cli

#endif  // BLOCKPOST_TOOLS_CLI_H_
