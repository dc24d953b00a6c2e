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

#include "blockpost/rng.h"

#include "blockpost/error.h"

namespace blockpost {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t Finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  return Finalize(Finalize(a + kGolden) ^ (b * 0xd6e8feb86659fd93ULL + 1));
}

CounterRng::CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t index)
    : state_(MixSeed(MixSeed(seed, static_cast<std::uint64_t>(tag)), index)) {}

CounterRng::result_type CounterRng::operator()() {
  state_ += kGolden;
  return Finalize(state_);
}

double CounterRng::Uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::UniformOpen() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

bool CounterRng::Bernoulli(double p) { return Uniform() < p; }

int CounterRng::Categorical(std::span<const double> weights) {
  if (weights.empty()) ThrowInvalid("categorical draw over empty support");
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = Uniform() * total;
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

std::uint64_t CounterRng::Below(std::uint64_t bound) {
  if (bound == 0) ThrowInvalid("empty integer range");
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace blockpost
