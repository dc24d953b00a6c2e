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

#ifndef BLOCKPOST_HARNESS_H_
#define BLOCKPOST_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "blockpost/bounds.h"
#include "blockpost/model.h"
#include "blockpost/posterior.h"
#include "blockpost/symmetry.h"

namespace blockpost {

enum class MRule { kEqual, kNOverLogN };
enum class XiRule { kOne, kConstant, kLogSquaredOverN, kInverseN };

std::string_view MRuleName(MRule rule);
std::string_view XiRuleName(XiRule rule);
int ApplyMRule(MRule rule, int n);
double ApplyXiRule(XiRule rule, double constant, int n);
// Whether (log n) / (m_n xi_n) -> 0 and (log n) / m_n -> 0 under the rules.
bool RulesWithinTheory(MRule m_rule, XiRule xi_rule);

struct ExperimentPlan {
  ModelSpec spec;
  std::vector<int> n_grid;
  MRule m_rule = MRule::kEqual;
  int replicates = 1;
  double eta = 0.0;
  XiRule xi_rule = XiRule::kOne;
  double xi_constant = 1.0;
  std::uint64_t master_seed = 0;
  // Comparison configurations per distance in sampled-sandwich mode.
  int comparisons_per_distance = 2;
  // Random restarts for the approximate MAP search.
  int icm_restarts = 4;
  std::uint64_t max_configs = std::uint64_t{1} << 24;
  int threads = 1;
};

// Plan file: JSON object, see docs/file-formats.md. Relative "spec_path"
// entries resolve against `base_dir`.
ExperimentPlan ParsePlanJson(std::string_view text,
                             const std::filesystem::path& base_dir = {});
ExperimentPlan LoadPlan(const std::filesystem::path& path);
std::string PlanToJson(const ExperimentPlan& plan);

// Seeds derived from the master seed; independent of execution order.
std::uint64_t ReplicateSeed(std::uint64_t master_seed, int n, int replicate);

// Uniform offsets in [-eta, eta] per coordinate, clipped to the parameter
// box, then averaged over Sigma-orbits so the result stays Sigma-invariant.
ConnectivityMatrix PerturbPi(const ConnectivityMatrix& pi_star,
                             const Family& family, const SymmetryGroup& sigma,
                             double eta, std::uint64_t seed);

// `count` configurations obtained by moving r uniformly chosen rows (and
// columns in LBM) of `truth` to a uniformly chosen different group.
std::vector<Configuration> ComparisonConfigs(const Configuration& truth, int r,
                                             int count, std::uint64_t seed);
// r in {1, 2, n/4, n/2}, deduplicated and clipped to [1, n].
std::vector<int> ComparisonDistances(int n);

// Log posterior up to the normaliser, evaluated from a density table.
double TableLogPosterior(const LogDensityTable& table, const ModelSpec& theta,
                         const Configuration& c);

// Coordinate ascent on the log posterior from each start; returns the best
// local maximum (ties: first start).
Configuration IcmMap(const LogDensityTable& table, const ModelSpec& theta,
                     const std::vector<Configuration>& starts);

struct SandwichTally {
  std::int64_t checked = 0;
  std::int64_t lower_violations = 0;
  std::int64_t upper_violations = 0;
  double worst_lower_slack = 0.0;  // min of value - lower bound
  double worst_upper_slack = 0.0;  // min of upper bound - value
};

// Posterior-ratio bounds at configuration c versus truth:
//   c1 D - K R <= log p(s(Z), t(W)) - log p(c) <= C D + K R
// with D = m r1 + n r2 (2 n r1 in SBM), R = r1 + r2 (r1 in SBM).
void TallySandwich(double log_ratio, int r1, int r2, int n, int m,
                   const BoundReport& report, SandwichTally& tally);

struct ExperimentRow {
  int n = 0;
  int m = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double xi = 1.0;
  bool good_set = false;
  std::string map_method;       // exact | icm
  std::string sandwich_mode;    // exhaustive | sampled
  double truth_mass = 0.0;      // NaN when not enumerable
  double truth_class_mass = 0.0;
  double class_mass_lower = 0.0;
  int map_raw = 0;
  int map_equiv = 0;
  double a_nm = 0.0;
  double eps_nm = 0.0;
  std::int64_t sandwich_checked = 0;
  bool sandwich_violation = false;
  double rate_value = 0.0;      // xi (c - 2 L0 eta)
  double mean_nonzero_per_row = 0.0;
  double max_perturbation = 0.0;
};

struct GridSummary {
  int n = 0;
  int m = 0;
  double xi = 1.0;
  int replicates = 0;
  double mean_map_equiv = 0.0;
  double frac_map_exact = 0.0;      // up-to-equivalence error 0
  double frac_good_set = 0.0;
  double good_set_bound = 0.0;
  double frac_sandwich_ok = 0.0;
  double frac_class_mass_ok = 0.0;  // class mass >= 1 - |Sigma| a e^a
  double eps_nm = 0.0;
};

struct ExperimentResult {
  std::string kind;  // convergence | sparse
  bool within_theory = true;
  std::vector<ExperimentRow> rows;  // sorted by (n, replicate)
  std::vector<GridSummary> summary;
};

ExperimentResult RunConvergenceSweep(const ExperimentPlan& plan);
ExperimentResult RunSparseSweep(const ExperimentPlan& plan);

std::string ResultRowsCsv(const ExperimentResult& result);
std::string ResultSummaryCsv(const ExperimentResult& result);
// rows.csv, summary.csv and plan.json (resolved plan plus spec hash).
void WriteExperiment(const std::filesystem::path& dir, const ExperimentPlan& plan,
                     const ExperimentResult& result);

// Number of isotonic (nonincreasing) violations: pairs of consecutive values
// with v[k+1] > v[k] + tol.
int IsotonicViolations(const std::vector<double>& values, double tol = 0.0);

struct ConcentrationPair {
  Configuration c_star;
  Configuration c;
};

struct ConcentrationRow {
  int pair = 0;
  double eps = 0.0;
  int r1 = 0;
  int r2 = 0;
  double scale = 0.0;  // m r1 + n r2
  double expected_delta = 0.0;
  int exceed = 0;
  int replicates = 0;
  double frequency = 0.0;
  double bound = 0.0;  // tail factor exp(-psi*(eps) scale)
  double slack = 0.0;  // 3-sigma allowance
  bool violation = false;
};

struct ConcentrationOptions {
  std::vector<double> eps_grid;
  int replicates = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  RateOptions rate;
};

// Monte Carlo tail frequency of |delta - Delta| >= eps (m r1 + n r2) under
// data drawn at c_star and pi_star, against the closed-form tail bound.
std::vector<ConcentrationRow> RunConcentrationCheck(
    const ModelSpec& spec, const std::vector<ConcentrationPair>& pairs,
    const ConcentrationOptions& options);

// A good-set reference configuration and comparison configs at each distance.
std::vector<ConcentrationPair> DefaultConcentrationPairs(const ModelSpec& spec,
                                                         int n, int m,
                                                         std::uint64_t seed);

struct ExhaustiveOptions {
  int n = 4;
  int m = 4;
  double eta = 0.0;          // perturbation radius for the sandwich check
  int perturbations = 0;
  std::uint64_t seed = 0;
  std::uint64_t max_configs = 1 << 16;
  int threads = 1;
};

struct ExhaustiveReport {
  std::int64_t references = 0;  // c_star in the good set
  std::int64_t pairs = 0;
  std::int64_t diff_count_violations = 0;
  double diff_count_worst_slack = 0.0;  // min lhs - rhs
  // Sandwich check at pi = pi_star followed by each perturbation.
  std::vector<double> pi_distances;
  std::int64_t sandwich_lower_violations = 0;
  std::int64_t sandwich_upper_violations = 0;
  double sandwich_worst_lower_slack = 0.0;
  double sandwich_worst_upper_slack = 0.0;
};

struct DifferenceCountRow {
  std::size_t ref_index;
  std::size_t config_index;
  BoundNumberCheck check;
};

// Scans every (c_star, c) with c_star in the good set. `on_row`, when
// set, receives each difference-count evaluation in scan order.
ExhaustiveReport RunExhaustiveChecks(
    const ModelSpec& spec, const ExhaustiveOptions& options,
    const std::function<void(const DifferenceCountRow&)>& on_row = {});

}  // namespace blockpost

#endif  // BLOCKPOST_HARNESS_H_
