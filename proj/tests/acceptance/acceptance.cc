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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and sizes are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "blockpost/bounds.h"
#include "blockpost/divergence.h"
#include "blockpost/harness.h"
#include "blockpost/posterior.h"
#include "blockpost/rate.h"
#include "blockpost/sampling.h"
#include "blockpost/symmetry.h"
#include "kl_oracle.h"
#include "test_util.h"

namespace blockpost {
namespace {

using testing::AffiliationSbm;
using testing::BernoulliSbm;
using testing::MakeLbm;

constexpr double kPosteriorTol = 1e-10;
constexpr double kBayesRelTol = 1e-10;
constexpr double kSymmetryTol = 1e-10;
constexpr double kKlTol = 1e-8;
constexpr double kRateRelTol = 1e-9;
constexpr double kRateAbsTol = 1e-15;
constexpr int kMaxIsotonicViolations = 1;
constexpr double kExactFraction = 0.95;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int Threads() { return std::max(1u, std::thread::hardware_concurrency()); }

template <typename... Args>
std::string Format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string Join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + Format("%.3f", x);
  return s;
}

Outcome PosteriorCorrectness() {
  std::mt19937_64 rng(2024);
  const std::vector<Family> families = testing::FamilyCatalogue();
  double worst = 0.0, worst_norm = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Family& f = families[k % families.size()];
    const auto inst = testing::MakeRandomInstance(rng, f);
    const Configuration c = SampleConfiguration(inst.spec, inst.n, inst.m, rng());
    const ObservationMatrix x = SampleObservations(inst.spec, c, rng());
    const PosteriorTable t = ExactPosterior(x, inst.spec);
    const std::vector<double> oracle = testing::OraclePosterior(x, inst.spec);
    if (oracle.size() != t.size()) return {false, "table size differs from oracle"};
    double total = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      total += t.mass(i);
      worst = std::max(worst, std::abs(t.mass(i) - oracle[i]));
    }
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }
  return {worst <= kPosteriorTol && worst_norm <= kPosteriorTol,
          Format("max |mass - oracle| = %.2e, max |sum - 1| = %.2e", worst, worst_norm)};
}

Outcome BayesInvariance() {
  const ModelSpec spec = AffiliationSbm(3, 0.75, 0.25, {0.2, 0.3, 0.5});
  const SymmetryGroup g = DetectSymmetryGroup(spec.pi(), spec.variant());
  if (g.size() != 6) return {false, "expected |Sigma| = 6"};
  double worst = 0.0;
  std::int64_t checks = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Configuration truth = SampleConfiguration(spec, 5, 5, 1000 + rep);
    const PosteriorTable t = ExactPosterior(SampleObservations(spec, truth, 5000 + rep), spec);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Configuration c = t.ConfigAt(i);
      for (const PermutationPair& s : g.pairs()) {
        const Configuration sc = Apply(s, c);
        const double post = t.log_mass(i) - t.log_mass(t.IndexOf(sc));
        const double prior = LogPrior(c, spec) - LogPrior(sc, spec);
        worst = std::max(worst, std::abs(std::expm1(post - prior)));
        ++checks;
      }
    }
  }
  return {worst <= kBayesRelTol,
          Format("%lld ratio checks, max relative error %.2e", static_cast<long long>(checks), worst)};
}

ModelSpec GenericLbm() {
  return MakeLbm(Family::Bernoulli(0.1), {Param{0.2}, Param{0.7}, Param{0.8}, Param{0.4}},
                 {0.5, 0.5}, {0.5, 0.5});
}

ModelSpec AffiliationFive() { return AffiliationSbm(3, 0.8, 0.2, {1.0 / 3, 1.0 / 3, 1.0 / 3}); }

Outcome Exhaustive(bool sandwich) {
  Outcome out;
  struct Case {
    const char* name;
    ModelSpec spec;
    int n;
  };
  const std::vector<Case> cases{{"lbm 4x4", GenericLbm(), 4}, {"affiliation n=5", AffiliationFive(), 5}};
  for (const Case& cs : cases) {
    ExhaustiveOptions o;
    o.n = cs.n;
    o.m = cs.n;
    o.threads = Threads();
    o.seed = 77;
    if (sandwich) {
      const BoundReport r = TheoremConstants(cs.spec, 0.0);
      o.eta = 0.2 * r.c / (2.0 * r.L0);
      o.perturbations = 10;
    }
    const ExhaustiveReport rep = RunExhaustiveChecks(cs.spec, o);
    if (sandwich) {
      const std::int64_t v = rep.sandwich_lower_violations + rep.sandwich_upper_violations;
      out.pass = out.pass && v == 0 && rep.pi_distances.size() == 11;
      out.detail += Format("%s: %lld pairs x %zu matrices, %lld violations, slack lo %.3g hi %.3g; ",
                           cs.name, static_cast<long long>(rep.pairs), rep.pi_distances.size(),
                           static_cast<long long>(v), rep.sandwich_worst_lower_slack,
                           rep.sandwich_worst_upper_slack);
    } else {
      out.pass = out.pass && rep.diff_count_violations == 0 && rep.pairs > 0;
      out.detail += Format("%s: %lld pairs, %lld violations; ", cs.name,
                           static_cast<long long>(rep.pairs),
                           static_cast<long long>(rep.diff_count_violations));
    }
  }
  return out;
}

Outcome KlClosedForms() {
  std::mt19937_64 rng(55);
  double worst = 0.0;
  std::string worst_family;
  for (const Family& f : testing::FamilyCatalogue()) {
    for (int k = 0; k < 100; ++k) {
      const Param p = testing::RandomParam(f, rng);
      const Param q = testing::RandomParam(f, rng);
      const double err = std::abs(KlDivergence(f, p, q) - testing::OracleKl(f, p, q));
      if (err > worst) {
        worst = err;
        worst_family = std::string(f.name());
      }
    }
  }
  return {worst <= kKlTol, Format("max error %.2e (%s)", worst, worst_family.c_str())};
}

ModelSpec ConcentrationSpec(const Family& f, std::mt19937_64& rng) {
  std::vector<Param> entries;
  for (int k = 0; k < 4; ++k) entries.push_back(testing::RandomParam(f, rng));
  return MakeLbm(f, entries, {0.5, 0.5}, {0.5, 0.5});
}

Outcome RateValidity() {
  Outcome out;
  RateOptions bernstein;
  bernstein.bernstein = true;
  std::vector<std::string> failing;
  const double mu = 0.5;
  for (const Family& f : testing::FamilyCatalogue()) {
    std::vector<RateOptions> variants{RateOptions{}};
    if (f.kind() == FamilyKind::kBernoulli) variants.push_back(bernstein);
    const double top = 2.0 * KappaMax(f);
    for (const RateOptions& o : variants) {
      const RateFunction psi = DefaultRateFunction(f, mu, o);
      int bad = 0;
      for (int k = 1; k <= 20; ++k) {
        const double x = top * k / 20.0;
        const double exact = ExactChernoffRate(f, mu, x);
        if (psi(x) > exact * (1 + kRateRelTol) + kRateAbsTol) ++bad;
      }
      if (bad > 0) {
        failing.push_back(Format("%s/%s %d of 20", std::string(f.name()).c_str(),
                                 std::string(psi.name()).c_str(), bad));
      }
    }
  }
  std::int64_t cells = 0, violations = 0;
  std::mt19937_64 rng(909);
  for (const Family& f : testing::FamilyCatalogue()) {
    const ModelSpec spec = ConcentrationSpec(f, rng);
    ConcentrationOptions o;
    o.eps_grid = {0.05, 0.1, 0.25, 0.5, 1.0};
    o.replicates = 10000;
    o.seed = rng();
    o.threads = Threads();
    const auto rows = RunConcentrationCheck(spec, DefaultConcentrationPairs(spec, 6, 6, rng()), o);
    for (const ConcentrationRow& r : rows) {
      ++cells;
      if (r.violation) {
        ++violations;
        failing.push_back(Format("tail %s eps=%.2f", std::string(f.name()).c_str(), r.eps));
      }
    }
  }
  out.pass = failing.empty();
  out.detail = Format("tail cells %lld, violations %lld", static_cast<long long>(cells),
                      static_cast<long long>(violations));
  for (const std::string& s : failing) out.detail += "; above exact: " + s;
  return out;
}

Outcome DenseTrend() {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  if (!DetectSymmetryGroup(spec.pi(), spec.variant()).is_trivial()) {
    return {false, "symmetry group is not trivial"};
  }
  ExperimentPlan plan{spec, {6, 8, 10, 12, 14}};
  plan.replicates = 200;
  plan.master_seed = 7;
  plan.threads = Threads();
  const ExperimentResult r = RunConvergenceSweep(plan);
  std::vector<double> means;
  for (const GridSummary& s : r.summary) means.push_back(s.mean_map_equiv);
  const int iso = IsotonicViolations(means);
  const double exact = r.summary.back().frac_map_exact;
  return {iso <= kMaxIsotonicViolations && exact >= kExactFraction,
          Format("mean misclassified [%s], isotonic violations %d, exact at n=14 %.3f (need %.2f)",
                 Join(means).c_str(), iso, exact, kExactFraction)};
}

Outcome SymmetryMasses() {
  const ModelSpec spec = AffiliationSbm(3, 0.7, 0.3, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const SymmetryGroup g = DetectSymmetryGroup(spec.pi(), spec.variant());
  double worst_equal = 0.0, worst_class = 0.0;
  std::int64_t free_orbits = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Configuration truth = SampleConfiguration(spec, 6, 6, 300 + rep);
    const PosteriorTable t = ExactPosterior(SampleObservations(spec, truth, 700 + rep), spec);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Configuration c = t.ConfigAt(i);
      if (!(CanonicalRepresentative(c, g) == c)) continue;
      const std::vector<Configuration> orbit = Orbit(c, g);
      for (const Configuration& e : orbit) {
        worst_equal = std::max(worst_equal, std::abs(t.mass(t.IndexOf(e)) - t.mass(i)));
      }
      if (orbit.size() == g.size()) {
        ++free_orbits;
        const double cm = PosteriorMassOfClass(t, c, g);
        worst_class = std::max(worst_class, std::abs(cm - g.size() * t.mass(i)));
      }
    }
  }
  return {g.size() == 6 && worst_equal <= kSymmetryTol && worst_class <= kSymmetryTol,
          Format("|Sigma| = %zu, max mass spread %.2e, max |class - |Sigma| mass| %.2e over %lld classes",
                 g.size(), worst_equal, worst_class, static_cast<long long>(free_orbits))};
}

Outcome SparseScalingsAndTrend() {
  Outcome out;
  const std::vector<double> xis{1.0, 0.1, 0.01, 0.001};
  const Family bern = Family::Bernoulli(0.1);
  const ConnectivityMatrix pb(2, 2, {Param{0.9}, Param{0.3}, Param{0.3}, Param{0.3}});
  const Family zi = Family::ZeroInflated(0.1, Family::GaussLocation(1.0, -1.0, 2.0));
  const ConnectivityMatrix pz(2, 2, {Param{0.2, -0.5}, Param{0.5, 0.3}, Param{0.7, 1.2},
                                     Param{0.9, 1.8}});
  for (double xi : xis) {
    const SparseScalings sb = ComputeSparseScalings(pb, bern, xi, 0.5);
    const double kb = KappaMin(pb.WithXi(xi), bern);
    const SparseScalings sz = ComputeSparseScalings(pz, zi, xi, 0.5);
    const double kz = KappaMin(pz.WithXi(xi), zi);
    const bool ok = kb >= xi * CMin(pb, 0.1) && kb >= sb.kappa_lower && kz >= sz.kappa_lower;
    out.pass = out.pass && ok;
    out.detail += Format("xi=%g kappa %.3g>=%.3g, weighted %.3g>=%.3g; ", xi, kb, sb.kappa_lower,
                         kz, sz.kappa_lower);
  }
  const ModelSpec spec = AffiliationSbm(2, 0.9, 0.3, {0.5, 0.5});
  ExperimentPlan plan{spec, {32, 64, 128, 256}};
  plan.replicates = 50;
  plan.xi_rule = XiRule::kLogSquaredOverN;
  plan.master_seed = 11;
  plan.threads = Threads();
  const ExperimentResult r = RunSparseSweep(plan);
  std::vector<double> means;
  bool sampled = true;
  for (const GridSummary& s : r.summary) means.push_back(s.mean_map_equiv);
  for (const ExperimentRow& row : r.rows) sampled = sampled && row.sandwich_mode == "sampled";
  const int iso = IsotonicViolations(means);
  out.pass = out.pass && sampled && r.within_theory && iso <= kMaxIsotonicViolations;
  out.detail += Format("sparse mean misclassified [%s], isotonic violations %d", Join(means).c_str(),
                       iso);
  return out;
}

Outcome Determinism() {
  ExperimentPlan dense{BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.4, 0.6}), {6, 9}};
  dense.replicates = 8;
  dense.master_seed = 123;
  dense.threads = 1;
  ExperimentPlan sparse{BernoulliSbm({{0.9, 0.3}, {0.3, 0.3}}, {0.5, 0.5}), {20, 40}};
  sparse.replicates = 4;
  sparse.master_seed = 321;
  sparse.xi_rule = XiRule::kLogSquaredOverN;
  sparse.threads = 1;
  const std::string d1 = ResultRowsCsv(RunConvergenceSweep(dense));
  const std::string s1 = ResultRowsCsv(RunSparseSweep(sparse));
  bool same = true;
  for (int threads : {1, 4}) {
    dense.threads = sparse.threads = threads;
    same = same && ResultRowsCsv(RunConvergenceSweep(dense)) == d1 &&
           ResultRowsCsv(RunSparseSweep(sparse)) == s1;
  }
  return {same, Format("dense %zu bytes, sparse %zu bytes, threads 1 and 4", d1.size(), s1.size())};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no runtime requirement
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace blockpost

int main() {
  using namespace blockpost;
  const std::vector<Criterion> criteria{
      {1, "posterior correctness", 60, PosteriorCorrectness},
      {2, "Bayes ratio invariance", 0, BayesInvariance},
      {3, "difference-count bound, exhaustive", 120, [] { return Exhaustive(false); }},
      {4, "conditional-expectation sandwich, exhaustive", 0, [] { return Exhaustive(true); }},
      {5, "KL closed forms", 0, KlClosedForms},
      {6, "rate-function validity", 0, RateValidity},
      {7, "dense MAP trend", 600, DenseTrend},
      {8, "symmetric posterior masses", 0, SymmetryMasses},
      {9, "sparse scalings and trend", 900, SparseScalingsAndTrend},
      {10, "sweep determinism", 0, Determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += Format("; over the %.0f s budget", c.budget_seconds);
    }
    if (!o.pass) ++failures;
    std::printf("CRITERION %2d %s  %s  (%.1f s)  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
