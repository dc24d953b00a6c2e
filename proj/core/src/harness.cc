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

#include "blockpost/harness.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "blockpost/divergence.h"
#include "blockpost/error.h"
#include "blockpost/hash.h"
#include "blockpost/io.h"
#include "blockpost/rng.h"
#include "blockpost/sampling.h"
#include "json.hpp"
#include "parallel.h"

namespace blockpost {
namespace {

using internal::ParallelFor;
using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool InIndexSet(IndexSetKind kind, int i, int j) {
  switch (kind) {
    case IndexSetKind::kFull:
      return true;
    case IndexSetKind::kNoDiag:
      return i != j;
    case IndexSetKind::kUpper:
      return i < j;
  }
  return false;
}

bool HasDistinctEntries(const ConnectivityMatrix& pi) {
  for (const Param& p : pi.entries()) {
    if (!(p == pi.entries().front())) return true;
  }
  return false;
}

std::string Num(double x) { return FormatShortest(x); }

std::vector<int> ParseGrid(const json& j) {
  std::vector<int> grid;
  if (j.is_array()) {
    for (const json& v : j) grid.push_back(v.get<int>());
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    int a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0) {
      ThrowInvalid("grid must look like a:b:step, got '" + s + "'");
    }
    for (int v = a; v <= b; v += step) grid.push_back(v);
  } else {
    ThrowInvalid("n_grid must be an array or an a:b:step string");
  }
  if (grid.empty()) ThrowInvalid("n_grid is empty");
  for (int v : grid) {
    if (v < 1) ThrowInvalid("n_grid values must be positive");
  }
  return grid;
}

MRule ParseMRule(const std::string& s) {
  if (s == "equal") return MRule::kEqual;
  if (s == "n_over_log_n") return MRule::kNOverLogN;
  ThrowInvalid("unknown m_rule '" + s + "'");
}

// Row-score of assigning row i (or node i in SBM) to group q.
double RowScore(const LogDensityTable& t, const ModelSpec& theta,
                const std::vector<int>& z, const std::vector<int>& w, int i,
                int q) {
  double s = std::log(theta.alpha()[q]);
  const int L = theta.L();
  if (!theta.is_sbm()) {
    for (int j = 0; j < t.m(); ++j) s += t.at(i, j, q * L + w[j]);
    return s;
  }
  const IndexSetKind kind = t.index_set();
  for (int j = 0; j < t.n(); ++j) {
    if (j == i) continue;
    if (InIndexSet(kind, i, j)) s += t.at(i, j, q * L + z[j]);
    if (InIndexSet(kind, j, i)) s += t.at(j, i, z[j] * L + q);
  }
  if (InIndexSet(kind, i, i)) s += t.at(i, i, q * L + q);
  return s;
}

double ColumnScore(const LogDensityTable& t, const ModelSpec& theta,
                   const std::vector<int>& z, int j, int l) {
  double s = std::log(theta.beta()[l]);
  const int L = theta.L();
  for (int i = 0; i < t.n(); ++i) s += t.at(i, j, z[i] * L + l);
  return s;
}

// Best label for one coordinate; keeps the current label unless another is
// strictly better.
template <typename Score>
bool Improve(int groups, int& label, Score score) {
  const double current = score(label);
  double best = current;
  int best_label = label;
  for (int g = 0; g < groups; ++g) {
    if (g == label) continue;
    const double v = score(g);
    if (v > best + 1e-12) {
      best = v;
      best_label = g;
    }
  }
  if (best_label == label) return false;
  label = best_label;
  return true;
}

Configuration Ascend(const LogDensityTable& t, const ModelSpec& theta,
                     const Configuration& start) {
  std::vector<int> z(start.z().begin(), start.z().end());
  std::vector<int> w(start.w().begin(), start.w().end());
  const bool sbm = theta.is_sbm();
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool changed = false;
    for (int i = 0; i < t.n(); ++i) {
      changed |= Improve(theta.Q(), z[i],
                         [&](int q) { return RowScore(t, theta, z, w, i, q); });
    }
    if (!sbm) {
      for (int j = 0; j < t.m(); ++j) {
        changed |= Improve(theta.L(), w[j],
                           [&](int l) { return ColumnScore(t, theta, z, j, l); });
      }
    }
    if (!changed) break;
  }
  if (sbm) return Configuration::Sbm(std::move(z), theta.Q());
  return Configuration::Lbm(std::move(z), theta.Q(), std::move(w), theta.L());
}

struct GridPoint {
  int n = 0;
  int m = 0;
  double xi = 1.0;
  std::optional<ModelSpec> spec;
  std::optional<BoundReport> report;
};

ExperimentRow RunReplicate(const ExperimentPlan& plan, const GridPoint& g,
                           const SymmetryGroup& sigma, int replicate) {
  const ModelSpec& spec = *g.spec;
  const Family& family = spec.family();
  ExperimentRow row;
  row.n = g.n;
  row.m = g.m;
  row.replicate = replicate;
  row.xi = g.xi;
  row.seed = ReplicateSeed(plan.master_seed, g.n, replicate);

  const Configuration truth = SampleConfiguration(spec, g.n, g.m, MixSeed(row.seed, 1));
  const ObservationMatrix x = SampleObservations(spec, truth, MixSeed(row.seed, 2));
  ConnectivityMatrix pi = spec.pi();
  if (plan.eta > 0.0) {
    pi = PerturbPi(spec.pi().WithXi(1.0), family, sigma, plan.eta, MixSeed(row.seed, 3))
             .WithXi(g.xi);
  }
  row.max_perturbation = SupDistance(pi.WithXi(1.0), spec.pi().WithXi(1.0));
  const ModelSpec theta = spec.WithPi(pi);
  row.good_set = InGoodSet(truth, spec);

  std::size_t nonzero = 0;
  for (const Cell& cell : IndexSetCells(g.n, g.m, x.index_set())) {
    nonzero += x.raw(cell.i, cell.j) != 0.0;
  }
  const double per_cell = x.index_set() == IndexSetKind::kUpper ? 2.0 : 1.0;
  row.mean_nonzero_per_row = per_cell * static_cast<double>(nonzero) / g.n;

  SandwichTally tally;
  Configuration map = truth;
  const std::uint64_t count =
      ConfigurationCount(g.n, g.m, spec.Q(), spec.L(), spec.is_sbm());
  if (count <= plan.max_configs) {
    row.map_method = "exact";
    row.sandwich_mode = "exhaustive";
    const PosteriorTable table = ExactPosterior(x, theta, {plan.max_configs, 1});
    row.truth_mass = table.mass(table.IndexOf(truth));
    row.truth_class_mass = PosteriorMassOfClass(table, truth, sigma);
    map = MapConfiguration(table);
    if (g.report) {
      for (std::size_t k = 0; k < table.size(); ++k) {
        const Configuration c = table.ConfigAt(k);
        const Distance d = ConfigDistance(c, truth, sigma);
        const Configuration image = Apply(d.pair, truth);
        const double ratio =
            table.log_unnormalized(table.IndexOf(image)) - table.log_unnormalized(k);
        TallySandwich(ratio, d.r1, d.r2, g.n, g.m, *g.report, tally);
      }
    }
  } else {
    row.map_method = "icm";
    row.sandwich_mode = "sampled";
    row.truth_mass = kNaN;
    row.truth_class_mass = kNaN;
    const LogDensityTable t(x, pi, family);
    std::vector<Configuration> starts{truth};
    std::vector<Configuration> comparisons;
    for (int r : ComparisonDistances(g.n)) {
      for (Configuration& c : ComparisonConfigs(truth, r, plan.comparisons_per_distance,
                                                MixSeed(MixSeed(row.seed, 4), r))) {
        comparisons.push_back(std::move(c));
      }
    }
    starts.insert(starts.end(), comparisons.begin(), comparisons.end());
    for (int k = 0; k < plan.icm_restarts; ++k) {
      starts.push_back(SampleConfiguration(spec, g.n, g.m, MixSeed(MixSeed(row.seed, 5), k)));
    }
    map = IcmMap(t, theta, starts);
    if (g.report) {
      for (const Configuration& c : comparisons) {
        const Distance d = ConfigDistance(c, truth, sigma);
        const double ratio = TableLogPosterior(t, theta, Apply(d.pair, truth)) -
                             TableLogPosterior(t, theta, c);
        TallySandwich(ratio, d.r1, d.r2, g.n, g.m, *g.report, tally);
      }
    }
  }
  const Misclassification mc = CountMisclassified(map, truth, sigma);
  row.map_raw = mc.raw;
  row.map_equiv = mc.up_to_equivalence;
  row.sandwich_checked = tally.checked;
  row.sandwich_violation = tally.lower_violations + tally.upper_violations > 0;
  if (g.report) {
    row.a_nm = g.report->a_nm(g.n, g.m);
    row.eps_nm = g.report->eps_nm(g.n, g.m);
    row.class_mass_lower = g.report->class_mass_lower(g.n, g.m);
    row.rate_value = g.report->a_exponent();
  } else {
    row.a_nm = row.eps_nm = row.class_mass_lower = row.rate_value = kNaN;
  }
  return row;
}

ExperimentResult RunSweep(const ExperimentPlan& plan, bool sparse) {
  const ModelSpec& base = plan.spec;
  if (plan.replicates < 1) ThrowInvalid("replicates must be positive");
  if (base.is_sbm() && plan.m_rule != MRule::kEqual) {
    ThrowInvalid("SBM plans require m_rule = equal");
  }
  if (sparse && !base.family().supports_sparsity()) {
    ThrowInvalid("sparse sweeps need a bernoulli or zero-inflated family");
  }
  if (!sparse && plan.xi_rule != XiRule::kOne) {
    ThrowInvalid("the convergence sweep runs at xi = 1; use the sparse sweep");
  }
  const SymmetryGroup sigma = DetectSymmetryGroup(base.pi(), base.variant());
  const bool informative = HasDistinctEntries(base.pi());

  std::vector<GridPoint> grid;
  for (int n : plan.n_grid) {
    GridPoint g;
    g.n = n;
    g.m = ApplyMRule(plan.m_rule, n);
    if (g.m > n) ThrowInvalid("plan requires m_n <= n");
    g.xi = sparse ? ApplyXiRule(plan.xi_rule, plan.xi_constant, n) : 1.0;
    g.spec = base.WithPi(base.pi().WithXi(g.xi));
    if (informative) {
      BoundOptions bo;
      bo.sparse_form = sparse;
      g.report = TheoremConstants(*g.spec, plan.eta, bo);
    } else if (plan.eta != 0.0) {
      ThrowTheory("eta must be 0 when all connectivity entries coincide");
    }
    grid.push_back(std::move(g));
  }

  ExperimentResult result;
  result.kind = sparse ? "sparse" : "convergence";
  result.within_theory = sparse ? RulesWithinTheory(plan.m_rule, plan.xi_rule)
                                : RulesWithinTheory(plan.m_rule, XiRule::kOne);
  const std::size_t reps = static_cast<std::size_t>(plan.replicates);
  result.rows.resize(grid.size() * reps);
  ParallelFor(result.rows.size(), plan.threads, [&](std::size_t task) {
    const GridPoint& g = grid[task / reps];
    result.rows[task] = RunReplicate(plan, g, sigma, static_cast<int>(task % reps));
  });

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const GridPoint& g = grid[k];
    GridSummary s;
    s.n = g.n;
    s.m = g.m;
    s.xi = g.xi;
    s.replicates = plan.replicates;
    s.good_set_bound = GoodSetProbabilityBound(*g.spec, g.n, g.m);
    s.eps_nm = g.report ? g.report->eps_nm(g.n, g.m) : kNaN;
    int exact = 0, good = 0, sandwich_ok = 0, mass_ok = 0;
    double sum_equiv = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const ExperimentRow& row = result.rows[k * reps + r];
      sum_equiv += row.map_equiv;
      exact += row.map_equiv == 0;
      good += row.good_set;
      sandwich_ok += !row.sandwich_violation;
      mass_ok += row.truth_class_mass >= row.class_mass_lower;
    }
    const double R = static_cast<double>(reps);
    s.mean_map_equiv = sum_equiv / R;
    s.frac_map_exact = exact / R;
    s.frac_good_set = good / R;
    s.frac_sandwich_ok = sandwich_ok / R;
    s.frac_class_mass_ok = g.report ? mass_ok / R : kNaN;
    result.summary.push_back(s);
  }
  return result;
}

}  // namespace

std::string_view MRuleName(MRule rule) {
  return rule == MRule::kEqual ? "equal" : "n_over_log_n";
}

std::string_view XiRuleName(XiRule rule) {
  switch (rule) {
    case XiRule::kOne:
      return "one";
    case XiRule::kConstant:
      return "constant";
    case XiRule::kLogSquaredOverN:
      return "log_squared_over_n";
    case XiRule::kInverseN:
      return "inverse_n";
  }
  return "unknown";
}

int ApplyMRule(MRule rule, int n) {
  if (rule == MRule::kEqual || n < 3) return n;
  return std::clamp(static_cast<int>(std::ceil(n / std::log(n))), 1, n);
}

double ApplyXiRule(XiRule rule, double constant, int n) {
  switch (rule) {
    case XiRule::kOne:
      return 1.0;
    case XiRule::kConstant:
      return constant;
    case XiRule::kLogSquaredOverN: {
      const double l = std::log(static_cast<double>(n));
      return std::min(1.0, l * l / n);
    }
    case XiRule::kInverseN:
      return 1.0 / n;
  }
  return 1.0;
}

bool RulesWithinTheory(MRule m_rule, XiRule xi_rule) {
  // m_n xi_n must outgrow log n.
  const bool flat = xi_rule == XiRule::kOne || xi_rule == XiRule::kConstant;
  if (m_rule == MRule::kEqual) return xi_rule != XiRule::kInverseN;
  return flat;
}

ExperimentPlan ParsePlanJson(std::string_view text,
                             const std::filesystem::path& base_dir) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) ThrowInvalid("plan must be a JSON object");
    static const std::set<std::string> kKeys = {
        "schema_version", "spec", "spec_path", "n_grid", "m_rule", "replicates",
        "eta", "xi_rule", "master_seed", "comparisons_per_distance",
        "icm_restarts", "max_configs", "threads"};
    for (const auto& [key, value] : j.items()) {
      if (!kKeys.count(key)) ThrowInvalid("unknown plan key '" + key + "'");
    }
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kSchemaVersion) {
      ThrowInvalid("unsupported plan schema_version");
    }
    std::optional<ModelSpec> spec;
    if (j.contains("spec") == j.contains("spec_path")) {
      ThrowInvalid("plan needs exactly one of 'spec' and 'spec_path'");
    }
    if (j.contains("spec")) {
      spec = ParseSpecJson(j["spec"].dump());
    } else {
      std::filesystem::path p = j["spec_path"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      spec = LoadSpec(p);
    }
    if (!j.contains("n_grid")) ThrowInvalid("plan needs n_grid");
    ExperimentPlan plan{*spec, ParseGrid(j["n_grid"])};
    if (j.contains("m_rule")) plan.m_rule = ParseMRule(j["m_rule"].get<std::string>());
    if (j.contains("replicates")) plan.replicates = j["replicates"].get<int>();
    if (j.contains("eta")) plan.eta = j["eta"].get<double>();
    if (j.contains("xi_rule")) {
      const json& x = j["xi_rule"];
      if (x.is_object()) {
        if (x.size() != 1 || !x.contains("constant")) {
          ThrowInvalid("xi_rule object must be {\"constant\": value}");
        }
        plan.xi_rule = XiRule::kConstant;
        plan.xi_constant = x["constant"].get<double>();
        if (!(plan.xi_constant > 0.0 && plan.xi_constant <= 1.0)) {
          ThrowInvalid("constant xi must lie in (0, 1]");
        }
      } else {
        const std::string s = x.get<std::string>();
        if (s == "one") {
          plan.xi_rule = XiRule::kOne;
        } else if (s == "log_squared_over_n") {
          plan.xi_rule = XiRule::kLogSquaredOverN;
        } else if (s == "inverse_n") {
          plan.xi_rule = XiRule::kInverseN;
        } else {
          ThrowInvalid("unknown xi_rule '" + s + "'");
        }
      }
    }
    if (j.contains("master_seed")) plan.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("comparisons_per_distance")) {
      plan.comparisons_per_distance = j["comparisons_per_distance"].get<int>();
    }
    if (j.contains("icm_restarts")) plan.icm_restarts = j["icm_restarts"].get<int>();
    if (j.contains("max_configs")) plan.max_configs = j["max_configs"].get<std::uint64_t>();
    if (j.contains("threads")) plan.threads = j["threads"].get<int>();
    if (plan.replicates < 1) ThrowInvalid("replicates must be positive");
    if (plan.comparisons_per_distance < 0 || plan.icm_restarts < 0) {
      ThrowInvalid("comparison and restart counts must be nonnegative");
    }
    for (int n : plan.n_grid) {
      if (ApplyMRule(plan.m_rule, n) > n) ThrowInvalid("plan requires m_n <= n");
    }
    return plan;
  } catch (const json::exception& e) {
    ThrowInvalid(std::string("plan JSON: ") + e.what());
  }
}

ExperimentPlan LoadPlan(const std::filesystem::path& path) {
  return ParsePlanJson(ReadFile(path), path.parent_path());
}

std::string PlanToJson(const ExperimentPlan& plan) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["spec"] = json::parse(SpecToJson(plan.spec));
  j["n_grid"] = plan.n_grid;
  j["m_rule"] = std::string(MRuleName(plan.m_rule));
  j["replicates"] = plan.replicates;
  j["eta"] = plan.eta;
  if (plan.xi_rule == XiRule::kConstant) {
    j["xi_rule"] = {{"constant", plan.xi_constant}};
  } else {
    j["xi_rule"] = std::string(XiRuleName(plan.xi_rule));
  }
  j["master_seed"] = plan.master_seed;
  j["comparisons_per_distance"] = plan.comparisons_per_distance;
  j["icm_restarts"] = plan.icm_restarts;
  j["max_configs"] = plan.max_configs;
  j["threads"] = plan.threads;
  return j.dump(2);
}

std::uint64_t ReplicateSeed(std::uint64_t master_seed, int n, int replicate) {
  return MixSeed(MixSeed(master_seed, static_cast<std::uint64_t>(n)),
                 static_cast<std::uint64_t>(replicate));
}

ConnectivityMatrix PerturbPi(const ConnectivityMatrix& pi_star,
                             const Family& family, const SymmetryGroup& sigma,
                             double eta, std::uint64_t seed) {
  if (!(eta >= 0.0)) ThrowInvalid("perturbation radius must be nonnegative");
  const int Q = pi_star.rows();
  const int L = pi_star.cols();
  std::vector<Param> raw = pi_star.entries();
  for (std::size_t k = 0; k < raw.size(); ++k) {
    Param& p = raw[k];
    CounterRng rng(seed, StreamTag::kPerturbation, k);
    std::vector<double> d(p.size());
    for (double& v : d) v = eta * (2.0 * rng.Uniform() - 1.0);
    switch (family.kind()) {
      case FamilyKind::kMultinomial: {
        double mean = 0.0;
        for (double v : d) mean += v / d.size();
        double mx = 0.0;
        for (double& v : d) {
          v -= mean;
          mx = std::max(mx, std::abs(v));
        }
        const double shrink = mx > eta ? eta / mx : 1.0;
        const Interval b = family.bounds();
        double t = shrink;
        for (std::size_t c = 0; c < d.size(); ++c) {
          if (d[c] > 0) t = std::min(t, (b.hi - p[c]) / d[c]);
          if (d[c] < 0) t = std::min(t, (b.lo - p[c]) / d[c]);
        }
        t = std::max(t, 0.0);
        for (std::size_t c = 0; c < d.size(); ++c) p[c] += t * d[c];
        break;
      }
      case FamilyKind::kZeroInflated: {
        const Interval s = family.bounds();
        const Interval g = family.inner().bounds();
        p[0] = std::clamp(p[0] + d[0], s.lo, s.hi);
        p[1] = std::clamp(p[1] + d[1], g.lo, g.hi);
        break;
      }
      default: {
        const Interval b = family.bounds();
        p[0] = std::clamp(p[0] + d[0], b.lo, b.hi);
      }
    }
  }
  std::vector<Param> out(raw.size());
  const double size = static_cast<double>(sigma.size());
  for (int q = 0; q < Q; ++q) {
    for (int l = 0; l < L; ++l) {
      std::vector<double> acc(raw[q * L + l].size(), 0.0);
      for (const PermutationPair& g : sigma.pairs()) {
        const Param& src = raw[g.s[q] * L + g.t[l]];
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += src[c];
      }
      for (double& v : acc) v /= size;
      out[q * L + l] = Param(std::move(acc));
    }
  }
  return ConnectivityMatrix(Q, L, std::move(out), pi_star.xi());
}

std::vector<Configuration> ComparisonConfigs(const Configuration& truth, int r,
                                             int count, std::uint64_t seed) {
  const int n = truth.n();
  const int slots = truth.tied() ? n : n + truth.m();
  if (r < 0 || r > slots) ThrowInvalid("comparison distance out of range");
  std::vector<Configuration> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    CounterRng rng(seed, StreamTag::kComparison, static_cast<std::uint64_t>(k));
    std::vector<int> positions(slots);
    for (int p = 0; p < slots; ++p) positions[p] = p;
    for (int p = 0; p < r; ++p) {
      const int swap = p + static_cast<int>(rng.Below(slots - p));
      std::swap(positions[p], positions[swap]);
    }
    Configuration c = truth;
    for (int p = 0; p < r; ++p) {
      const int pos = positions[p];
      if (pos < n) {
        if (c.Q() < 2) continue;
        const int shift = 1 + static_cast<int>(rng.Below(c.Q() - 1));
        c.set_z(pos, (c.z(pos) + shift) % c.Q());
      } else {
        if (c.L() < 2) continue;
        const int j = pos - n;
        const int shift = 1 + static_cast<int>(rng.Below(c.L() - 1));
        c.set_w(j, (c.w(j) + shift) % c.L());
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<int> ComparisonDistances(int n) {
  std::set<int> d;
  for (int r : {1, 2, n / 4, n / 2}) d.insert(std::clamp(r, 1, n));
  return {d.begin(), d.end()};
}

double TableLogPosterior(const LogDensityTable& table, const ModelSpec& theta,
                         const Configuration& c) {
  const int L = theta.L();
  double s = LogPrior(c, theta);
  for (const Cell& cell : IndexSetCells(table.n(), table.m(), table.index_set())) {
    s += table.at(cell.i, cell.j, c.z(cell.i) * L + c.w(cell.j));
  }
  return s;
}

Configuration IcmMap(const LogDensityTable& table, const ModelSpec& theta,
                     const std::vector<Configuration>& starts) {
  if (starts.empty()) ThrowInvalid("approximate MAP needs at least one start");
  std::optional<Configuration> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const Configuration& start : starts) {
    Configuration c = Ascend(table, theta, start);
    const double v = TableLogPosterior(table, theta, c);
    if (!best || v > best_value) {
      best = std::move(c);
      best_value = v;
    }
  }
  return *best;
}

void TallySandwich(double log_ratio, int r1, int r2, int n, int m,
                   const BoundReport& report, SandwichTally& tally) {
  const double D = report.sbm ? 2.0 * n * r1 : static_cast<double>(m) * r1 +
                                                   static_cast<double>(n) * r2;
  const double R = report.sbm ? r1 : r1 + r2;
  const double lower = report.a_exponent() * D - report.K * R;
  const double upper = report.C * D + report.K * R;
  const double lo_slack = log_ratio - lower;
  const double hi_slack = upper - log_ratio;
  if (tally.checked == 0) {
    tally.worst_lower_slack = lo_slack;
    tally.worst_upper_slack = hi_slack;
  } else {
    tally.worst_lower_slack = std::min(tally.worst_lower_slack, lo_slack);
    tally.worst_upper_slack = std::min(tally.worst_upper_slack, hi_slack);
  }
  ++tally.checked;
  tally.lower_violations += lo_slack < 0.0;
  tally.upper_violations += hi_slack < 0.0;
}

ExperimentResult RunConvergenceSweep(const ExperimentPlan& plan) {
  return RunSweep(plan, false);
}

ExperimentResult RunSparseSweep(const ExperimentPlan& plan) {
  return RunSweep(plan, true);
}

namespace {
const char* Bool(bool b) { return b ? "true" : "false"; }
}  // namespace

std::string ResultRowsCsv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "n,m,replicate,seed,xi,good_set,map_method,sandwich_mode,truth_mass,"
         "truth_class_mass,class_mass_lower,map_raw,map_equiv,a_nm,eps_nm,"
         "sandwich_checked,sandwich_violation,rate_value,mean_nonzero_per_row,"
         "max_perturbation,within_theory\n";
  for (const ExperimentRow& r : result.rows) {
    out << r.n << ',' << r.m << ',' << r.replicate << ',' << r.seed << ','
        << Num(r.xi) << ',' << Bool(r.good_set) << ',' << r.map_method << ','
        << r.sandwich_mode << ',' << Num(r.truth_mass) << ','
        << Num(r.truth_class_mass) << ',' << Num(r.class_mass_lower) << ','
        << r.map_raw << ',' << r.map_equiv << ',' << Num(r.a_nm) << ','
        << Num(r.eps_nm) << ',' << r.sandwich_checked << ','
        << Bool(r.sandwich_violation) << ',' << Num(r.rate_value) << ','
        << Num(r.mean_nonzero_per_row) << ',' << Num(r.max_perturbation) << ','
        << Bool(result.within_theory) << '\n';
  }
  return out.str();
}

std::string ResultSummaryCsv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "n,m,xi,replicates,mean_map_equiv,frac_map_exact,frac_good_set,"
         "good_set_bound,frac_sandwich_ok,frac_class_mass_ok,eps_nm\n";
  for (const GridSummary& s : result.summary) {
    out << s.n << ',' << s.m << ',' << Num(s.xi) << ',' << s.replicates << ','
        << Num(s.mean_map_equiv) << ',' << Num(s.frac_map_exact) << ','
        << Num(s.frac_good_set) << ',' << Num(s.good_set_bound) << ','
        << Num(s.frac_sandwich_ok) << ',' << Num(s.frac_class_mass_ok) << ','
        << Num(s.eps_nm) << '\n';
  }
  return out.str();
}

void WriteExperiment(const std::filesystem::path& dir, const ExperimentPlan& plan,
                     const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) ThrowIo("cannot create output directory " + dir.string());
  WriteFile(dir / "rows.csv", ResultRowsCsv(result));
  WriteFile(dir / "summary.csv", ResultSummaryCsv(result));
  json sidecar;
  sidecar["kind"] = result.kind;
  sidecar["within_theory"] = result.within_theory;
  sidecar["spec_hash"] = GitBlobHash(SpecToJson(plan.spec));
  sidecar["plan"] = json::parse(PlanToJson(plan));
  WriteFile(dir / "plan.json", sidecar.dump(2) + "\n");
}

int IsotonicViolations(const std::vector<double>& values, double tol) {
  int v = 0;
  for (std::size_t k = 1; k < values.size(); ++k) v += values[k] > values[k - 1] + tol;
  return v;
}

std::vector<ConcentrationRow> RunConcentrationCheck(
    const ModelSpec& spec, const std::vector<ConcentrationPair>& pairs,
    const ConcentrationOptions& options) {
  if (options.replicates < 1) ThrowInvalid("replicates must be positive");
  const Family& family = spec.family();
  const SymmetryGroup sigma = DetectSymmetryGroup(spec.pi(), spec.variant());
  RateOptions ro = options.rate;
  ro.xi = spec.pi().xi();
  const RateFunction psi = DefaultRateFunction(family, spec.mu_min(), ro);
  const IndexSetKind index_set = spec.variant().index_set();
  const std::size_t R = static_cast<std::size_t>(options.replicates);

  struct PairInfo {
    Distance dist;
    double scale;
    double expected;
  };
  std::vector<PairInfo> info;
  for (const ConcentrationPair& p : pairs) {
    CheckConfiguration(p.c_star, spec);
    CheckConfiguration(p.c, spec);
    if (!InGoodSet(p.c_star, spec)) {
      ThrowInvalid("concentration pairs need a reference in the good set");
    }
    PairInfo pi;
    pi.dist = ConfigDistance(p.c, p.c_star, sigma);
    const int n = p.c.n();
    const int m = p.c.m();
    pi.scale = spec.is_sbm() ? 2.0 * n * pi.dist.r1
                             : static_cast<double>(m) * pi.dist.r1 +
                                   static_cast<double>(n) * pi.dist.r2;
    pi.expected = ExpectedDelta(p.c_star, p.c, spec.pi(), spec.pi(), family, index_set);
    info.push_back(pi);
  }

  std::vector<double> deviation(pairs.size() * R);
  ParallelFor(deviation.size(), options.threads, [&](std::size_t task) {
    const std::size_t p = task / R;
    const std::size_t r = task % R;
    const std::uint64_t seed =
        MixSeed(MixSeed(options.seed, static_cast<std::uint64_t>(StreamTag::kConcentration) + p), r);
    const ObservationMatrix x = SampleObservations(spec, pairs[p].c_star, seed);
    const double delta = DeltaStatistic(x, pairs[p].c_star, pairs[p].c, spec.pi(), family);
    deviation[task] = std::abs(delta - info[p].expected);
  });

  std::vector<ConcentrationRow> rows;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (double eps : options.eps_grid) {
      ConcentrationRow row;
      row.pair = static_cast<int>(p);
      row.eps = eps;
      row.r1 = info[p].dist.r1;
      row.r2 = info[p].dist.r2;
      row.scale = info[p].scale;
      row.expected_delta = info[p].expected;
      row.replicates = options.replicates;
      for (std::size_t r = 0; r < R; ++r) {
        row.exceed += deviation[p * R + r] >= eps * row.scale;
      }
      row.frequency = static_cast<double>(row.exceed) / R;
      row.bound = psi.tail_factor() * std::exp(-psi(eps) * row.scale);
      const double pb = std::min(row.bound, 1.0);
      row.slack = 3.0 * std::sqrt(pb * (1.0 - pb) / R);
      row.violation = row.frequency > row.bound + row.slack;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<ConcentrationPair> DefaultConcentrationPairs(const ModelSpec& spec,
                                                         int n, int m,
                                                         std::uint64_t seed) {
  std::optional<Configuration> ref;
  for (std::uint64_t k = 0; k < 10000 && !ref; ++k) {
    Configuration c = SampleConfiguration(spec, n, m, MixSeed(seed, k));
    if (InGoodSet(c, spec)) ref = std::move(c);
  }
  if (!ref) ThrowTheory("no good-set configuration found for this size");
  std::vector<ConcentrationPair> pairs;
  for (int r : ComparisonDistances(n)) {
    for (Configuration& c :
         ComparisonConfigs(*ref, r, 1, MixSeed(MixSeed(seed, 0xc0ffee), r))) {
      pairs.push_back({*ref, std::move(c)});
    }
  }
  return pairs;
}

ExhaustiveReport RunExhaustiveChecks(
    const ModelSpec& spec, const ExhaustiveOptions& options,
    const std::function<void(const DifferenceCountRow&)>& on_row) {
  const int n = options.n;
  const int m = spec.is_sbm() ? options.n : options.m;
  if (spec.is_sbm() && options.m != options.n) ThrowInvalid("SBM requires n = m");
  const bool tied = spec.is_sbm();
  const std::uint64_t count = ConfigurationCount(n, m, spec.Q(), spec.L(), tied);
  if (count > options.max_configs) {
    ThrowCap("exhaustive scan needs " + std::to_string(count) +
             " configurations; cap is " + std::to_string(options.max_configs));
  }
  const Family& family = spec.family();
  const IndexSetKind index_set = spec.variant().index_set();
  const SymmetryGroup sigma = DetectSymmetryGroup(spec.pi(), spec.variant());
  const BoundReport report = TheoremConstants(spec, options.eta);

  std::vector<ConnectivityMatrix> pis{spec.pi()};
  for (int k = 0; k < options.perturbations; ++k) {
    pis.push_back(PerturbPi(spec.pi(), family, sigma, options.eta,
                            MixSeed(options.seed, static_cast<std::uint64_t>(k))));
  }
  ExhaustiveReport out;
  for (const ConnectivityMatrix& p : pis) out.pi_distances.push_back(SupDistance(p, spec.pi()));

  std::vector<Configuration> configs;
  configs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) configs.push_back(ConfigurationAt(k, n, m, spec.Q(), spec.L(), tied));
  std::vector<std::size_t> refs;
  for (std::size_t k = 0; k < count; ++k) {
    if (InGoodSet(configs[k], spec)) refs.push_back(k);
  }
  out.references = static_cast<std::int64_t>(refs.size());

  struct Partial {
    std::int64_t pairs = 0;
    std::int64_t diff_count_violations = 0;
    double lemma_slack = std::numeric_limits<double>::infinity();
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    double lower_slack = std::numeric_limits<double>::infinity();
    double upper_slack = std::numeric_limits<double>::infinity();
    std::vector<DifferenceCountRow> rows;
  };
  std::vector<Partial> partial(refs.size());
  const double mu = spec.mu_min();
  ParallelFor(refs.size(), options.threads, [&](std::size_t task) {
    Partial& acc = partial[task];
    const Configuration& c_star = configs[refs[task]];
    for (std::size_t k = 0; k < count; ++k) {
      const Configuration& c = configs[k];
      const BoundNumberCheck check =
          CheckBoundNumber(c_star, c, spec.pi(), sigma, mu, index_set);
      ++acc.pairs;
      acc.diff_count_violations += !check.holds;
      acc.lemma_slack = std::min(acc.lemma_slack, static_cast<double>(check.lhs) - check.rhs);
      if (on_row) acc.rows.push_back({refs[task], k, check});
      const double D = tied ? 2.0 * n * check.r1
                            : static_cast<double>(m) * check.r1 +
                                  static_cast<double>(n) * check.r2;
      for (std::size_t v = 0; v < pis.size(); ++v) {
        const double delta = ExpectedDelta(c_star, c, pis[v], spec.pi(), family, index_set);
        const double lower = 2.0 * (report.c - report.L0 * out.pi_distances[v]) * D;
        const double upper = report.C / 2.0 * D;
        const double tol = 1e-12 * (1.0 + std::abs(delta));
        const double ls = delta - lower;
        const double us = upper - delta;
        acc.lower += ls < -tol;
        acc.upper += us < -tol;
        acc.lower_slack = std::min(acc.lower_slack, ls);
        acc.upper_slack = std::min(acc.upper_slack, us);
      }
    }
  });

  double lemma_slack = std::numeric_limits<double>::infinity();
  double lower_slack = lemma_slack;
  double upper_slack = lemma_slack;
  for (const Partial& acc : partial) {
    out.pairs += acc.pairs;
    out.diff_count_violations += acc.diff_count_violations;
    out.sandwich_lower_violations += acc.lower;
    out.sandwich_upper_violations += acc.upper;
    lemma_slack = std::min(lemma_slack, acc.lemma_slack);
    lower_slack = std::min(lower_slack, acc.lower_slack);
    upper_slack = std::min(upper_slack, acc.upper_slack);
    if (on_row) {
      for (const DifferenceCountRow& row : acc.rows) on_row(row);
    }
  }
  if (out.pairs > 0) {
    out.diff_count_worst_slack = lemma_slack;
    out.sandwich_worst_lower_slack = lower_slack;
    out.sandwich_worst_upper_slack = upper_slack;
  }
  return out;
}

}  // namespace blockpost
