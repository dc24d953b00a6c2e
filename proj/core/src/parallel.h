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

#ifndef BLOCKPOST_SRC_PARALLEL_H_
#define BLOCKPOST_SRC_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace blockpost::internal {

// Runs body(task) for task in [0, tasks) on up to `threads` workers. Tasks
// write to disjoint outputs, so results do not depend on the schedule.
template <typename Body>
void ParallelFor(std::size_t tasks, int threads, Body body) {
  const std::size_t workers =
      std::min<std::size_t>(tasks, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < tasks; t = next++) body(t);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace blockpost::internal

#endif  // BLOCKPOST_SRC_PARALLEL_H_
