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

#ifndef BLOCKPOST_HASH_H_
#define BLOCKPOST_HASH_H_

#include <string>
#include <string_view>

namespace blockpost {

// SHA-1 of "blob <size>\0<content>" in lowercase hex, i.e. what
// `git hash-object` prints for the same bytes.
std::string GitBlobHash(std::string_view content);

}  // namespace blockpost

#endif  // BLOCKPOST_HASH_H_
