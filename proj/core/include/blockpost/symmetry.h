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

#ifndef BLOCKPOST_SYMMETRY_H_
#define BLOCKPOST_SYMMETRY_H_

#include <compare>
#include <cstdint>
#include <vector>

#include "blockpost/model.h"

namespace blockpost {

// (s, t): s permutes row groups, t permutes column groups. s[q] is the image
// of q. In SBM, s == t.
struct PermutationPair {
  std::vector<int> s;
  std::vector<int> t;

  auto operator<=>(const PermutationPair&) const = default;
};

PermutationPair IdentityPair(int Q, int L);
PermutationPair Compose(const PermutationPair& a, const PermutationPair& b);
PermutationPair Inverse(const PermutationPair& p);

// (s(z), t(w)).
Configuration Apply(const PermutationPair& p, const Configuration& c);

class SymmetryGroup {
 public:
  // Pairs are sorted lexicographically; the identity is always first.
  SymmetryGroup(int Q, int L, bool tied, std::vector<PermutationPair> pairs);
  static SymmetryGroup Trivial(int Q, int L, bool tied);

  int Q() const { return q_; }
  int L() const { return l_; }
  bool tied() const { return tied_; }
  std::size_t size() const { return pairs_.size(); }
  bool is_trivial() const { return pairs_.size() == 1; }
  const std::vector<PermutationPair>& pairs() const { return pairs_; }
  bool Contains(const PermutationPair& p) const;

  // Closure under composition and inverse, identity present.
  bool SatisfiesGroupAxioms() const;

 private:
  int q_;
  int l_;
  bool tied_;
  std::vector<PermutationPair> pairs_;
};

struct SymmetryOptions {
  // 0 means bitwise equality of parameters.
  double tolerance = 0.0;
  std::uint64_t max_pairs = 10'000'000;
  int max_groups = 8;
};

// Maximal subgroup of pairs with pi_{s(q) t(l)} = pi_{ql} for all (q, l).
SymmetryGroup DetectSymmetryGroup(const ConnectivityMatrix& pi,
                                  const ModelVariant& variant,
                                  const SymmetryOptions& options = {});

// pi^{s,t}: entry (q, l) is pi_{s(q) t(l)}.
ConnectivityMatrix Permute(const ConnectivityMatrix& pi,
                           const PermutationPair& p);
bool FixesMatrix(const ConnectivityMatrix& pi, const PermutationPair& p,
                 double tolerance = 0.0);

// True iff (s(z2), t(w2)) = (z1, w1) for some pair in sigma.
bool AreEquivalent(const Configuration& c1, const Configuration& c2,
                   const SymmetryGroup& sigma);

struct Distance {
  int d = 0;
  PermutationPair pair;  // first minimiser in group order
  int r1 = 0;            // ||z1 - s(z2)||_0
  int r2 = 0;            // ||w1 - t(w2)||_0; equals r1 in SBM
};

// LBM: d = min ||z1 - s(z2)||_0 + ||w1 - t(w2)||_0.
// SBM: d = min ||z1 - s(z2)||_0, with r1 = r2 = d.
Distance ConfigDistance(const Configuration& c1, const Configuration& c2,
                        const SymmetryGroup& sigma);

// Distinct members of the orbit {(s(z), t(w))}, sorted.
std::vector<Configuration> Orbit(const Configuration& c,
                                 const SymmetryGroup& sigma);
// Lexicographically smallest orbit member.
Configuration CanonicalRepresentative(const Configuration& c,
                                      const SymmetryGroup& sigma);

// |{(i, j) in I : pi_{z1_i w1_j} != pi_{z2_i w2_j}}| with exact comparison.
std::int64_t DiffCount(const Configuration& c1, const Configuration& c2,
                       const ConnectivityMatrix& pi, IndexSetKind index_set);

struct BoundNumberCheck {
  bool holds = false;
  std::int64_t lhs = 0;
  double rhs = 0.0;
  int r1 = 0;
  int r2 = 0;
};

// diff(c, c_star) >= mu_min^2 / 8 * (m r1 + n r2). `c_star` must be in the
// good set for mu_min (else InvalidArgument).
BoundNumberCheck CheckBoundNumber(const Configuration& c_star,
                                  const Configuration& c,
                                  const ConnectivityMatrix& pi_star,
                                  const SymmetryGroup& sigma, double mu_min,
                                  IndexSetKind index_set);

}  // namespace blockpost

#endif  // BLOCKPOST_SYMMETRY_H_
