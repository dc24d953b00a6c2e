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

#include "blockpost/sampling.h"

#include <algorithm>
#include <cmath>

#include "blockpost/error.h"

namespace blockpost {
namespace {

std::vector<int> DrawLabels(const std::vector<double>& weights, int count,
                            std::uint64_t seed, StreamTag tag) {
  std::vector<int> labels(count);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, tag, static_cast<std::uint64_t>(i));
    labels[i] = rng.Categorical(weights);
  }
  return labels;
}

}  // namespace

Configuration SampleConfiguration(const ModelSpec& spec, int n, int m,
                                  std::uint64_t seed) {
  if (n < 1 || m < 1) ThrowInvalid("n and m must be positive");
  if (spec.is_sbm()) {
    if (n != m) ThrowInvalid("SBM requires n = m");
    return Configuration::Sbm(
        DrawLabels(spec.alpha(), n, seed, StreamTag::kRowLabels), spec.Q());
  }
  return Configuration::Lbm(
      DrawLabels(spec.alpha(), n, seed, StreamTag::kRowLabels), spec.Q(),
      DrawLabels(spec.beta(), m, seed, StreamTag::kColumnLabels), spec.L());
}

ObservationMatrix SampleObservations(const ModelSpec& spec,
                                     const Configuration& config,
                                     std::uint64_t seed) {
  CheckConfiguration(config, spec);
  const Family& family = spec.family();
  const ConnectivityMatrix pi = spec.pi().Effective(family);
  const int n = config.n();
  const int m = config.m();
  ObservationMatrix x(n, m, spec.variant().index_set());
  for (const Cell& cell : IndexSetCells(n, m, x.index_set())) {
    CounterRng rng(seed, StreamTag::kCells,
                   static_cast<std::uint64_t>(cell.i) * m + cell.j);
    x.set(cell.i, cell.j,
          family.Sample(pi.at(config.z(cell.i), config.w(cell.j)), rng));
  }
  return x;
}

GroupCounts CountGroups(const Configuration& config) {
  GroupCounts counts{std::vector<int>(config.Q(), 0),
                     std::vector<int>(config.L(), 0)};
  for (int q : config.z()) ++counts.rows[q];
  for (int l : config.w()) ++counts.columns[l];
  return counts;
}

bool InGoodSet(const Configuration& config, const ModelSpec& spec) {
  CheckConfiguration(config, spec);
  const GroupCounts counts = CountGroups(config);
  const double mu = spec.mu_min();
  const double row_floor = config.n() * mu / 2.0;
  const double col_floor = config.m() * mu / 2.0;
  const auto ok = [](const std::vector<int>& v, double floor) {
    return std::all_of(v.begin(), v.end(),
                       [floor](int c) { return c >= floor; });
  };
  return ok(counts.rows, row_floor) && ok(counts.columns, col_floor);
}

double GoodSetProbabilityBound(const ModelSpec& spec, int n, int m) {
  const double mu = spec.mu_min();
  return 1.0 - 2.0 * spec.Q() * spec.L() *
                   std::exp(-std::min(n, m) * mu * mu / 2.0);
}

}  // namespace blockpost
