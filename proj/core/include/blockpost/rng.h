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

#ifndef BLOCKPOST_RNG_H_
#define BLOCKPOST_RNG_H_

#include <cstdint>
#include <span>

namespace blockpost {

// Stream tags. Each draw site gets its own tag so that adding a new kind of
// draw never shifts an existing sequence.
enum class StreamTag : std::uint64_t {
  kRowLabels = 1,
  kColumnLabels = 2,
  kCells = 3,
  kPerturbation = 4,
  kReplicate = 5,
  kComparison = 6,
  kConcentration = 7,
};

// Mixes two 64-bit words into one (SplitMix64 finalizer on a combination).
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

// Counter-based generator: the sequence is a pure function of
// (seed, tag, index), so cells can be drawn in any order or on any thread.
// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1).
  double UniformOpen();
  bool Bernoulli(double p);
  // Index drawn from unnormalised nonnegative weights.
  int Categorical(std::span<const double> weights);
  // Uniform integer in [0, bound).
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

}  // namespace blockpost

#endif  // BLOCKPOST_RNG_H_
