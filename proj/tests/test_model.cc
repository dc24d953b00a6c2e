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

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "blockpost/error.h"
#include "blockpost/family.h"
#include "blockpost/hash.h"
#include "blockpost/io.h"
#include "blockpost/model.h"
#include "blockpost/rng.h"
#include "blockpost/sampling.h"
#include "test_util.h"

namespace blockpost {
namespace {

using testing::BernoulliSbm;
using testing::FamilyCatalogue;
using testing::MakeLbm;

TEST(Family, LogDensityMatchesIndependentFormulas) {
  std::mt19937_64 rng(11);
  for (const Family& f : FamilyCatalogue()) {
    for (int trial = 0; trial < 20; ++trial) {
      const Param p = testing::RandomParam(f, rng);
      ASSERT_TRUE(f.InBounds(p, 1e-12)) << f.name();
      CounterRng draw(trial, StreamTag::kCells, 0);
      for (int k = 0; k < 10; ++k) {
        const double x = f.Sample(p, draw);
        EXPECT_TRUE(f.InSupport(x));
        EXPECT_NEAR(f.LogDensity(x, p), testing::OracleLogDensity(f, p, x), 1e-11)
            << f.name() << " x=" << x;
      }
    }
  }
}

TEST(Family, BoundsEnforced) {
  const Family b = Family::Bernoulli(0.05);
  EXPECT_FALSE(b.InBounds(Param{0.999}));
  EXPECT_THROW(b.CheckBounds(Param{0.999}), Error);
  EXPECT_THROW(Family::Bernoulli(0.6), Error);
  EXPECT_THROW(Family::ZeroInflated(0.1, Family::Poisson(1, 2)), Error);
}

TEST(Sampling, SingleGroupGivesAllOnes) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1), {Param{0.4}}, {1.0}, {1.0});
  const Configuration c = SampleConfiguration(spec, 7, 5, 3);
  for (int v : c.z()) EXPECT_EQ(v, 0);
  for (int v : c.w()) EXPECT_EQ(v, 0);
}

TEST(Sampling, SbmTiesLabels) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.3}}, {0.5, 0.5});
  const Configuration c = SampleConfiguration(spec, 3, 3, 42);
  EXPECT_TRUE(c.tied());
  EXPECT_EQ(c.n(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(c.z(i), c.w(i));
}

TEST(Sampling, GroupFrequencyWithinBinomialInterval) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1), {Param{0.3}, Param{0.6}},
                                 {0.5, 0.5}, {1.0});
  const int n = 100000;
  const Configuration c = SampleConfiguration(spec, n, 1, 2024);
  const GroupCounts g = CountGroups(c);
  const double freq = static_cast<double>(g.rows[0]) / n;
  // 0.01 is above 6 binomial standard deviations (0.0016 each).
  EXPECT_NEAR(freq, 0.5, 0.01);
}

TEST(Sampling, ZeroInflatedZeroFraction) {
  const Family f = Family::ZeroInflated(0.1, Family::ZeroTruncatedPoisson(0.5, 5.0));
  const Param p{0.3, 2.0};
  int zeros = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    CounterRng rng(5, StreamTag::kCells, k);
    zeros += f.Sample(p, rng) == 0.0;
  }
  EXPECT_NEAR(static_cast<double>(zeros) / draws, 0.7, 0.01);
}

TEST(Sampling, PoissonMean) {
  const Family f = Family::Poisson(0.5, 6.0);
  double sum = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    CounterRng rng(9, StreamTag::kCells, k);
    sum += f.Sample(Param{2.0}, rng);
  }
  EXPECT_NEAR(sum / draws, 2.0, 0.05);
}

TEST(Sampling, CountsMatchHistogram) {
  const ModelSpec spec =
      MakeLbm(Family::Bernoulli(0.1),
              {Param{0.2}, Param{0.3}, Param{0.4}, Param{0.5}, Param{0.6}, Param{0.7}},
              {0.2, 0.3, 0.5}, {0.6, 0.4});
  const Configuration c = SampleConfiguration(spec, 40, 30, 77);
  const GroupCounts g = CountGroups(c);
  std::map<int, int> hz, hw;
  for (int v : c.z()) ++hz[v];
  for (int v : c.w()) ++hw[v];
  for (int q = 0; q < 3; ++q) EXPECT_EQ(g.rows[q], hz[q]);
  for (int l = 0; l < 2; ++l) EXPECT_EQ(g.columns[l], hw[l]);
}

TEST(Sampling, GoodSetExamples) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1),
                                 {Param{0.2}, Param{0.7}, Param{0.8}, Param{0.4}},
                                 {0.5, 0.5}, {0.5, 0.5});
  EXPECT_TRUE(InGoodSet(Configuration::Lbm({0, 0, 1, 1}, 2, {0, 1, 0, 1}, 2), spec));
  EXPECT_FALSE(InGoodSet(Configuration::Lbm({0, 0, 0, 0}, 2, {0, 1, 0, 1}, 2), spec));
}

TEST(Sampling, DeterministicAndPrefixStable) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.3}}, {0.3, 0.7});
  const Configuration a = SampleConfiguration(spec, 12, 12, 5);
  const Configuration b = SampleConfiguration(spec, 12, 12, 5);
  EXPECT_EQ(a, b);
  const Configuration shorter = SampleConfiguration(spec, 6, 6, 5);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(shorter.z(i), a.z(i));
  EXPECT_EQ(SampleObservations(spec, a, 9), SampleObservations(spec, a, 9));
}

TEST(Model, IdentifiabilityAndValidation) {
  const Family f = Family::Bernoulli(0.1);
  EXPECT_FALSE(MakeLbm(f, {Param{0.2}, Param{0.2}, Param{0.2}, Param{0.2}},
                       {0.5, 0.5}, {0.5, 0.5}).IsIdentifiable());
  EXPECT_TRUE(MakeLbm(f, {Param{0.2}, Param{0.7}, Param{0.8}, Param{0.4}},
                      {0.5, 0.5}, {0.5, 0.5}).IsIdentifiable());
  EXPECT_THROW(MakeLbm(f, {Param{0.2}, Param{0.7}}, {0.7, 0.7}, {1.0}), Error);
  EXPECT_THROW(MakeLbm(f, {Param{0.95}, Param{0.7}}, {0.5, 0.5}, {1.0}), Error);
}

TEST(Io, SpecRoundTrip) {
  for (const Family& f : FamilyCatalogue()) {
    std::mt19937_64 rng(3);
    std::vector<Param> entries;
    for (int k = 0; k < 4; ++k) entries.push_back(testing::RandomParam(f, rng));
    const ModelSpec spec = MakeLbm(f, entries, {0.25, 0.75}, {0.5, 0.5});
    const std::string text = SpecToJson(spec);
    const ModelSpec back = ParseSpecJson(text);
    EXPECT_EQ(SpecToJson(back), text);
    EXPECT_EQ(back.pi(), spec.pi());
  }
}

TEST(Io, UnknownSpecKeyRejected) {
  EXPECT_THROW(ParseSpecJson(R"({"variant":"lbm","Q":1,"L":1,"alpha":[1],"beta":[1],
      "family":{"kind":"bernoulli","a":0.1},"pi":[0.5],"extra":1})"),
               Error);
}

TEST(Io, ObservationsRoundTrip) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.3}}, {0.3, 0.7}, 0.1, true, false);
  const Configuration c = SampleConfiguration(spec, 7, 7, 1);
  const ObservationMatrix x = SampleObservations(spec, c, 2);
  std::istringstream in(ObservationsToCsv(x, spec.family()));
  EXPECT_EQ(ReadObservationsCsv(in), x);

  const Family g = Family::GaussScale(0.3, 0.5, 3.0);
  const ModelSpec gs = MakeLbm(g, {Param{0.6}, Param{2.0}}, {1.0}, {0.5, 0.5});
  const Configuration cg = SampleConfiguration(gs, 3, 4, 1);
  const ObservationMatrix xg = SampleObservations(gs, cg, 2);
  std::istringstream ing(ObservationsToCsv(xg, g));
  EXPECT_EQ(ReadObservationsCsv(ing), xg);
}

TEST(Io, ShortestFormatRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) / (k + 1);
    EXPECT_EQ(std::stod(FormatShortest(x)), x);
  }
  EXPECT_EQ(FormatShortest(0.1), "0.1");
}

TEST(Hash, GitBlobHashMatchesGit) {
  // Known value of `printf 'hello\n' | git hash-object --stdin`.
  EXPECT_EQ(GitBlobHash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(GitBlobHash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Rng, StreamsAreIndependentOfOrder) {
  CounterRng a(1, StreamTag::kCells, 5);
  CounterRng b(1, StreamTag::kCells, 5);
  CounterRng c(1, StreamTag::kCells, 6);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  for (int k = 0; k < 1000; ++k) {
    const double u = a.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.Below(7), 7u);
  }
}

}  // namespace
}  // namespace blockpost
