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

#ifndef BLOCKPOST_SAMPLING_H_
#define BLOCKPOST_SAMPLING_H_

#include <cstdint>
#include <vector>

#include "blockpost/model.h"

namespace blockpost {

// z_i iid from alpha, w_j iid from beta (w = z for SBM). Row i uses stream
// (seed, kRowLabels, i), so prefixes agree across n.
Configuration SampleConfiguration(const ModelSpec& spec, int n, int m,
                                  std::uint64_t seed);

// X_ij ~ f(.; pi_{z_i w_j}) independently over the variant's index set, with
// xi folded into pi. Cell (i, j) uses stream (seed, kCells, i * m + j).
ObservationMatrix SampleObservations(const ModelSpec& spec,
                                     const Configuration& config,
                                     std::uint64_t seed);

struct GroupCounts {
  std::vector<int> rows;     // N_q(z)
  std::vector<int> columns;  // N_l(w)
};

GroupCounts CountGroups(const Configuration& config);

// N_q(z) >= n mu_min / 2 for every q and N_l(w) >= m mu_min / 2 for every l.
bool InGoodSet(const Configuration& config, const ModelSpec& spec);

// Lower bound 1 - 2QL exp(-(n ^ m) mu_min^2 / 2) on P(good set).
double GoodSetProbabilityBound(const ModelSpec& spec, int n, int m);

}  // namespace blockpost

#endif  // BLOCKPOST_SAMPLING_H_
