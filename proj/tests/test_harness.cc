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
#include <set>

#include "blockpost/error.h"
#include "blockpost/harness.h"
#include "blockpost/io.h"
#include "blockpost/sampling.h"
#include "test_util.h"

namespace blockpost {
namespace {

using testing::AffiliationSbm;
using testing::BernoulliSbm;
using testing::MakeLbm;

ExperimentPlan SmallPlan(const ModelSpec& spec) {
  ExperimentPlan plan{spec, {4, 6}};
  plan.replicates = 3;
  plan.master_seed = 99;
  return plan;
}

TEST(Harness, SingleGroupNeverMisclassifies) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1), {Param{0.4}}, {1.0}, {1.0});
  const ExperimentResult r = RunConvergenceSweep(SmallPlan(spec));
  ASSERT_EQ(r.rows.size(), 6u);
  for (const ExperimentRow& row : r.rows) {
    EXPECT_EQ(row.map_raw, 0);
    EXPECT_EQ(row.map_equiv, 0);
    EXPECT_NEAR(row.truth_mass, 1.0, 1e-12);
  }
}

TEST(Harness, RowsCarrySeedsAndAreSorted) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  ExperimentPlan plan = SmallPlan(spec);
  const ExperimentResult r = RunConvergenceSweep(plan);
  ASSERT_EQ(r.rows.size(), plan.n_grid.size() * plan.replicates);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const ExperimentRow& row = r.rows[k];
    EXPECT_EQ(row.n, plan.n_grid[k / 3]);
    EXPECT_EQ(row.replicate, static_cast<int>(k % 3));
    EXPECT_EQ(row.seed, ReplicateSeed(plan.master_seed, row.n, row.replicate));
    EXPECT_EQ(row.map_method, "exact");
  }
}

TEST(Harness, ScheduleIndependent) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.4, 0.6});
  ExperimentPlan plan = SmallPlan(spec);
  plan.eta = 0.0002;
  const std::string one = ResultRowsCsv(RunConvergenceSweep(plan));
  plan.threads = 4;
  EXPECT_EQ(ResultRowsCsv(RunConvergenceSweep(plan)), one);
}

TEST(Harness, EtaOutOfRangeIsTheoryViolation) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  ExperimentPlan plan = SmallPlan(spec);
  plan.eta = 1.0;
  try {
    RunConvergenceSweep(plan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTheoryViolation);
  }
}

TEST(Harness, CapExceededInConvergenceSweepUsesApproximateMap) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  ExperimentPlan plan = SmallPlan(spec);
  plan.max_configs = 8;
  const ExperimentResult r = RunConvergenceSweep(plan);
  for (const ExperimentRow& row : r.rows) {
    EXPECT_EQ(row.map_method, "icm");
    EXPECT_EQ(row.sandwich_mode, "sampled");
    EXPECT_TRUE(std::isnan(row.truth_mass));
  }
}

TEST(Harness, SparseWithUnitXiMatchesDenseMapResults) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  ExperimentPlan plan = SmallPlan(spec);
  const ExperimentResult dense = RunConvergenceSweep(plan);
  const ExperimentResult sparse = RunSparseSweep(plan);
  ASSERT_EQ(dense.rows.size(), sparse.rows.size());
  for (std::size_t k = 0; k < dense.rows.size(); ++k) {
    EXPECT_EQ(dense.rows[k].seed, sparse.rows[k].seed);
    EXPECT_EQ(dense.rows[k].truth_mass, sparse.rows[k].truth_mass);
    EXPECT_EQ(dense.rows[k].map_raw, sparse.rows[k].map_raw);
    EXPECT_EQ(dense.rows[k].map_equiv, sparse.rows[k].map_equiv);
    EXPECT_EQ(dense.rows[k].good_set, sparse.rows[k].good_set);
  }
}

TEST(Harness, OutsideTheoryPlansAreLabelled) {
  EXPECT_TRUE(RulesWithinTheory(MRule::kEqual, XiRule::kLogSquaredOverN));
  EXPECT_FALSE(RulesWithinTheory(MRule::kEqual, XiRule::kInverseN));
  EXPECT_FALSE(RulesWithinTheory(MRule::kNOverLogN, XiRule::kLogSquaredOverN));
  const ModelSpec spec = BernoulliSbm({{0.9, 0.3}, {0.3, 0.3}}, {0.5, 0.5});
  ExperimentPlan plan = SmallPlan(spec);
  plan.xi_rule = XiRule::kInverseN;
  const ExperimentResult r = RunSparseSweep(plan);
  EXPECT_FALSE(r.within_theory);
  EXPECT_EQ(r.rows.size(), 6u);
  EXPECT_NE(ResultRowsCsv(r).find(",false\n"), std::string::npos);
}

TEST(Harness, Rules) {
  EXPECT_EQ(ApplyMRule(MRule::kEqual, 50), 50);
  EXPECT_EQ(ApplyMRule(MRule::kNOverLogN, 100), static_cast<int>(std::ceil(100 / std::log(100.0))));
  EXPECT_DOUBLE_EQ(ApplyXiRule(XiRule::kLogSquaredOverN, 0, 64), std::pow(std::log(64.0), 2) / 64);
  for (int n = 2; n < 40; ++n) EXPECT_LE(ApplyXiRule(XiRule::kLogSquaredOverN, 0, n), 1.0);
  EXPECT_DOUBLE_EQ(ApplyXiRule(XiRule::kInverseN, 0, 8), 0.125);
}

TEST(Harness, PlanJsonRoundTrip) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  ExperimentPlan plan = SmallPlan(spec);
  plan.xi_rule = XiRule::kConstant;
  plan.xi_constant = 0.5;
  const std::string text = PlanToJson(plan);
  EXPECT_EQ(PlanToJson(ParsePlanJson(text)), text);
  EXPECT_THROW(ParsePlanJson(R"({"spec_path":"x.json","n_grid":[4],"bogus":1})"), Error);
  const std::string grid = R"({"spec":)" + SpecToJson(spec) + R"(,"n_grid":"4:10:2"})";
  EXPECT_EQ(ParsePlanJson(grid).n_grid, (std::vector<int>{4, 6, 8, 10}));
}

TEST(Harness, PerturbationStaysInBallBoxAndSymmetry) {
  const ModelSpec aff = AffiliationSbm(3, 0.7, 0.2, {0.3, 0.3, 0.4});
  const SymmetryGroup g = DetectSymmetryGroup(aff.pi(), aff.variant());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ConnectivityMatrix p = PerturbPi(aff.pi(), aff.family(), g, 0.05, seed);
    EXPECT_LE(SupDistance(p, aff.pi()), 0.05 + 1e-15);
    for (const Param& e : p.entries()) EXPECT_TRUE(aff.family().InBounds(e));
    for (const PermutationPair& s : g.pairs()) EXPECT_TRUE(FixesMatrix(p, s, 1e-15));
  }
  const Family mult = Family::Multinomial(3, 0.1);
  const ConnectivityMatrix pm(1, 2, {Param{0.1, 0.3, 0.6}, Param{0.5, 0.25, 0.25}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ConnectivityMatrix p =
        PerturbPi(pm, mult, SymmetryGroup::Trivial(1, 2, false), 0.05, seed);
    EXPECT_LE(SupDistance(p, pm), 0.05 + 1e-15);
    for (const Param& e : p.entries()) EXPECT_TRUE(mult.InBounds(e, 1e-12));
  }
}

TEST(Harness, ComparisonConfigsAtRequestedDistance) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  const Configuration truth = SampleConfiguration(spec, 20, 20, 3);
  const SymmetryGroup id = SymmetryGroup::Trivial(2, 2, true);
  for (int r : ComparisonDistances(20)) {
    for (const Configuration& c : ComparisonConfigs(truth, r, 5, 11)) {
      EXPECT_EQ(ConfigDistance(c, truth, id).d, r);
    }
  }
  EXPECT_EQ(ComparisonDistances(20), (std::vector<int>{1, 2, 5, 10}));
  EXPECT_EQ(ComparisonDistances(2), (std::vector<int>{1, 2}));
}

TEST(Harness, IcmFindsExactMapOnSmallInstance) {
  const ModelSpec spec = BernoulliSbm({{0.9, 0.1}, {0.1, 0.5}}, {0.5, 0.5});
  const Configuration truth = SampleConfiguration(spec, 10, 10, 1);
  const ObservationMatrix x = SampleObservations(spec, truth, 2);
  const PosteriorTable t = ExactPosterior(x, spec);
  const LogDensityTable table(x, spec.pi(), spec.family());
  std::vector<Configuration> starts{truth};
  for (int k = 0; k < 10; ++k) starts.push_back(SampleConfiguration(spec, 10, 10, 100 + k));
  const Configuration icm = IcmMap(table, spec, starts);
  EXPECT_NEAR(TableLogPosterior(table, spec, icm),
              t.log_unnormalized(t.IndexOf(MapConfiguration(t))), 1e-9);
  EXPECT_NEAR(TableLogPosterior(table, spec, truth), t.log_unnormalized(t.IndexOf(truth)), 1e-9);
}

TEST(Harness, ExhaustiveIdenticalPairsAndCounts) {
  const ModelSpec spec = MakeLbm(Family::Bernoulli(0.1),
                                 {Param{0.2}, Param{0.7}, Param{0.8}, Param{0.4}},
                                 {0.5, 0.5}, {0.5, 0.5});
  ExhaustiveOptions o;
  o.n = 3;
  o.m = 3;
  std::int64_t identical = 0;
  const ExhaustiveReport r = RunExhaustiveChecks(spec, o, [&](const DifferenceCountRow& row) {
    if (row.ref_index == row.config_index) {
      ++identical;
      EXPECT_EQ(row.check.lhs, 0);
      EXPECT_EQ(row.check.rhs, 0.0);
    }
  });
  EXPECT_EQ(identical, r.references);
  EXPECT_EQ(r.pairs, r.references * 64);
  EXPECT_EQ(r.diff_count_violations, 0);
  EXPECT_EQ(r.sandwich_lower_violations + r.sandwich_upper_violations, 0);
  o.max_configs = 10;
  EXPECT_THROW(RunExhaustiveChecks(spec, o), Error);
}

TEST(Harness, ConcentrationTrivialEnds) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5}, 0.1, true, false);
  const auto pairs = DefaultConcentrationPairs(spec, 8, 8, 3);
  ConcentrationOptions o;
  o.eps_grid = {1e-9, 50.0};
  o.replicates = 500;
  o.seed = 4;
  const auto rows = RunConcentrationCheck(spec, pairs, o);
  ASSERT_EQ(rows.size(), 2 * pairs.size());
  for (const ConcentrationRow& r : rows) {
    EXPECT_FALSE(r.violation);
    if (r.eps > 1.0) EXPECT_EQ(r.exceed, 0);
    if (r.eps < 1e-6) EXPECT_GE(r.bound, 1.0);
  }
  o.threads = 3;
  const auto again = RunConcentrationCheck(spec, pairs, o);
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].exceed, again[k].exceed);
}

TEST(Harness, IsotonicCount) {
  EXPECT_EQ(IsotonicViolations({3, 2, 2, 1}), 0);
  EXPECT_EQ(IsotonicViolations({3, 4, 2, 3}), 2);
}

}  // namespace
}  // namespace blockpost
