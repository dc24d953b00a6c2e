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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "blockpost/error.h"
#include "blockpost/sampling.h"
#include "blockpost/symmetry.h"
#include "test_util.h"

namespace blockpost {
namespace {

using testing::AffiliationSbm;
using testing::MakeLbm;

std::vector<std::vector<int>> AllPermutations(int k) {
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Filters all (s, t) pairs directly.
std::set<std::pair<std::vector<int>, std::vector<int>>> BruteForceSigma(
    const ConnectivityMatrix& pi, bool tied) {
  std::set<std::pair<std::vector<int>, std::vector<int>>> out;
  for (const auto& s : AllPermutations(pi.rows())) {
    for (const auto& t : AllPermutations(pi.cols())) {
      if (tied && s != t) continue;
      bool fixes = true;
      for (int q = 0; q < pi.rows() && fixes; ++q) {
        for (int l = 0; l < pi.cols() && fixes; ++l) {
          fixes = pi.at(s[q], t[l]) == pi.at(q, l);
        }
      }
      if (fixes) out.insert({s, t});
    }
  }
  return out;
}

TEST(Symmetry, AffiliationGivesFullSymmetricGroup) {
  for (int Q = 2; Q <= 4; ++Q) {
    const ModelSpec spec = AffiliationSbm(Q, 0.7, 0.2, std::vector<double>(Q, 1.0 / Q));
    const SymmetryGroup g = DetectSymmetryGroup(spec.pi(), spec.variant());
    EXPECT_EQ(g.size(), AllPermutations(Q).size());
    EXPECT_TRUE(g.SatisfiesGroupAxioms());
  }
}

TEST(Symmetry, GenericMatrixIsTrivial) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1),
                                 {Param{0.2}, Param{0.3}, Param{0.4}, Param{0.5}},
                                 {0.5, 0.5}, {0.5, 0.5});
  EXPECT_TRUE(DetectSymmetryGroup(spec.pi(), spec.variant()).is_trivial());
}

TEST(Symmetry, MatchesExhaustiveFilter) {
  // Rows 1,2 and columns 1,2 swappable jointly.
  const ConnectivityMatrix pi(3, 3,
                              {Param{0.2}, Param{0.6}, Param{0.4}, Param{0.6}, Param{0.2},
                               Param{0.4}, Param{0.5}, Param{0.5}, Param{0.8}});
  const SymmetryGroup g = DetectSymmetryGroup(pi, ModelVariant::Lbm());
  const auto oracle = BruteForceSigma(pi, false);
  ASSERT_EQ(g.size(), oracle.size());
  EXPECT_EQ(g.size(), 2u);
  for (const auto& p : g.pairs()) EXPECT_TRUE(oracle.count({p.s, p.t}));

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Param> e;
    for (int k = 0; k < 9; ++k) e.push_back(Param{pick(rng) ? 0.3 : 0.7});
    const ConnectivityMatrix m(3, 3, e);
    for (bool tied : {false, true}) {
      const ModelVariant v = tied ? ModelVariant::Sbm(true, true) : ModelVariant::Lbm();
      EXPECT_EQ(DetectSymmetryGroup(m, v).size(), BruteForceSigma(m, tied).size());
    }
  }
}

TEST(Symmetry, EquivalenceExamples) {
  const ModelSpec aff = AffiliationSbm(2, 0.8, 0.2, {0.5, 0.5});
  const SymmetryGroup g = DetectSymmetryGroup(aff.pi(), aff.variant());
  EXPECT_TRUE(AreEquivalent(Configuration::Sbm({0, 0, 1}, 2), Configuration::Sbm({1, 1, 0}, 2), g));
  const SymmetryGroup id = SymmetryGroup::Trivial(2, 2, true);
  EXPECT_FALSE(AreEquivalent(Configuration::Sbm({0, 0, 1}, 2), Configuration::Sbm({1, 1, 0}, 2), id));
  EXPECT_TRUE(AreEquivalent(Configuration::Sbm({0, 1, 1}, 2), Configuration::Sbm({0, 1, 1}, 2), id));
}

TEST(Symmetry, DistanceUsesBestPermutation) {
  const ModelSpec aff = AffiliationSbm(2, 0.8, 0.2, {0.5, 0.5});
  const SymmetryGroup g = DetectSymmetryGroup(aff.pi(), aff.variant());
  const Distance d =
      ConfigDistance(Configuration::Sbm({0, 0, 0, 1}, 2), Configuration::Sbm({1, 1, 0, 0}, 2), g);
  EXPECT_EQ(d.d, 1);
  EXPECT_EQ(d.r1, 1);
  EXPECT_EQ(d.r2, 1);
  EXPECT_EQ(ConfigDistance(Configuration::Sbm({0, 1, 1}, 2), Configuration::Sbm({1, 0, 0}, 2), g).d, 0);
}

TEST(Symmetry, DiffCountMatchesRecount) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1),
                                 {Param{0.2}, Param{0.7}, Param{0.2}, Param{0.4}, Param{0.7},
                                  Param{0.9}},
                                 {0.3, 0.3, 0.4}, {0.5, 0.5});
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Configuration c1 = SampleConfiguration(spec, 6, 5, rng());
    const Configuration c2 = SampleConfiguration(spec, 6, 5, rng());
    std::int64_t count = 0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 5; ++j) {
        count += !(spec.pi().at(c1.z(i), c1.w(j)) == spec.pi().at(c2.z(i), c2.w(j)));
      }
    }
    EXPECT_EQ(DiffCount(c1, c2, spec.pi(), IndexSetKind::kFull), count);
    EXPECT_EQ(DiffCount(c1, c1, spec.pi(), IndexSetKind::kFull), 0);
  }
}

TEST(Symmetry, EquivalentConfigsHaveZeroDiff) {
  const ModelSpec aff = AffiliationSbm(3, 0.8, 0.2, {0.3, 0.3, 0.4});
  const SymmetryGroup g = DetectSymmetryGroup(aff.pi(), aff.variant());
  const Configuration c = Configuration::Sbm({0, 1, 2, 2, 1}, 3);
  for (const Configuration& o : Orbit(c, g)) {
    EXPECT_EQ(DiffCount(c, o, aff.pi(), IndexSetKind::kUpper), 0);
  }
  EXPECT_EQ(Orbit(c, g).size(), 6u);
  EXPECT_EQ(CanonicalRepresentative(c, g), Configuration::Sbm({0, 1, 2, 2, 1}, 3));
}

TEST(Symmetry, BoundNumberIdenticalPairs) {
  const ModelSpec aff = AffiliationSbm(2, 0.8, 0.2, {0.5, 0.5});
  const SymmetryGroup g = DetectSymmetryGroup(aff.pi(), aff.variant());
  const Configuration c = Configuration::Sbm({0, 0, 1, 1}, 2);
  const BoundNumberCheck b = CheckBoundNumber(c, Configuration::Sbm({1, 1, 0, 0}, 2), aff.pi(), g,
                                              aff.mu_min(), IndexSetKind::kUpper);
  EXPECT_EQ(b.lhs, 0);
  EXPECT_EQ(b.rhs, 0.0);
  EXPECT_TRUE(b.holds);
  EXPECT_THROW(CheckBoundNumber(Configuration::Sbm({0, 0, 0, 0}, 2), c, aff.pi(), g,
                                aff.mu_min(), IndexSetKind::kUpper),
               Error);
}

}  // namespace
}  // namespace blockpost
