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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "blockpost/bounds.h"
#include "blockpost/divergence.h"
#include "blockpost/harness.h"
#include "blockpost/io.h"
#include "blockpost/posterior.h"
#include "blockpost/rate.h"
#include "blockpost/rng.h"
#include "blockpost/sampling.h"
#include "blockpost/symmetry.h"
#include "json.hpp"

namespace blockpost::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "-";
  std::string format = "csv";
  int threads = 0;
};

// A rectangular result rendered as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void Add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

std::string CellText(const json& v) {
  if (v.is_number_float()) return FormatShortest(v.get<double>());
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "nan";
  return v.dump();
}

std::string TableCsv(const Table& t) {
  std::ostringstream out;
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    out << (k ? "," : "") << t.columns[k];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << CellText(row[k]);
    out << '\n';
  }
  return out.str();
}

json TableJson(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json o = json::object();
    for (std::size_t k = 0; k < row.size(); ++k) o[t.columns[k]] = row[k];
    arr.push_back(std::move(o));
  }
  return arr;
}

// NaN and infinities are not JSON numbers.
json Number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

std::string Labels(std::span<const int> v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ' ';
    s += std::to_string(v[k] + 1);
  }
  return s;
}

json ConfigJson(const Configuration& c) {
  json j;
  std::vector<int> z, w;
  for (int v : c.z()) z.push_back(v + 1);
  j["z"] = z;
  if (!c.tied()) {
    for (int v : c.w()) w.push_back(v + 1);
    j["w"] = w;
  }
  return j;
}

std::vector<double> ParseRealGrid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::istringstream in(s);
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0)) {
      ThrowInvalid("grid must look like a:b:step, got '" + s + "'");
    }
    const long count = std::lround(std::floor((b - a) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(a + k * step);
  } else {
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        ThrowInvalid("not a number: '" + item + "'");
      }
    }
  }
  if (out.empty()) ThrowInvalid("empty grid '" + s + "'");
  return out;
}

std::vector<int> ParseIntGrid(const std::string& s) {
  std::vector<int> out;
  for (double v : ParseRealGrid(s)) {
    if (v != std::floor(v) || v < 1) ThrowInvalid("grid values must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Param ParseParam(const std::string& s) {
  std::vector<double> v = ParseRealGrid(s);
  return Param(std::move(v));
}

Family LoadFamilyArg(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{') text = ReadFile(arg);
  return ParseFamilyJson(text);
}

MRule ParseMRuleArg(const std::string& s) {
  if (s == "equal") return MRule::kEqual;
  if (s == "n_over_log_n") return MRule::kNOverLogN;
  ThrowInvalid("unknown m rule '" + s + "'");
}

// Collects outputs and writes them to stdout or into the output directory.
class Sink {
 public:
  Sink(const Globals& g, std::ostream& out) : g_(g), out_(out) {}

  bool to_stdout() const { return g_.out == "-"; }
  bool json_format() const { return g_.format == "json"; }

  void Text(const std::string& file, const std::string& content) {
    if (to_stdout()) {
      out_ << content;
    } else {
      Prepare();
      WriteFile(fs::path(g_.out) / file, content);
    }
  }

  void Result(const Table& t, const std::string& stem = "result") {
    if (json_format()) {
      Text(stem + ".json", TableJson(t).dump(2) + "\n");
    } else {
      Text(stem + ".csv", TableCsv(t));
    }
  }

  void Sidecar(const json& run) {
    if (to_stdout()) return;
    Prepare();
    WriteFile(fs::path(g_.out) / "run.json", run.dump(2) + "\n");
  }

 private:
  void Prepare() {
    std::error_code ec;
    fs::create_directories(g_.out, ec);
    if (ec) ThrowIo("cannot create output directory '" + g_.out + "'");
  }

  const Globals& g_;
  std::ostream& out_;
};

json ResolvedOptions(const CLI::App* app) {
  json o = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || opt == app->get_help_ptr()) continue;
    std::string key = opt->get_lnames().empty() ? name : opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() == 0) {
        o[key] = true;
      } else if (r.size() == 1) {
        o[key] = r.front();
      } else {
        o[key] = r;
      }
    } else {
      o[key] = opt->get_default_str();
    }
  }
  return o;
}

std::string CommandPath(const CLI::App* app) {
  std::string path;
  for (const CLI::App* a = app; a && a->get_parent(); a = a->get_parent()) {
    path = path.empty() ? a->get_name() : a->get_name() + " " + path;
  }
  return path;
}

const CLI::App* Leaf(const CLI::App* app) {
  for (const CLI::App* sub : app->get_subcommands()) return Leaf(sub);
  return app;
}

// --------------------------------------------------------------------------
// Subcommands

struct SimulateArgs {
  std::string spec;
  int n = 0;
  int m = 0;
};

void RunSimulate(const SimulateArgs& a, const Globals& g, Sink& sink) {
  const ModelSpec spec = LoadSpec(a.spec);
  const int m = spec.is_sbm() ? a.n : (a.m > 0 ? a.m : a.n);
  if (spec.is_sbm() && a.m > 0 && a.m != a.n) ThrowInvalid("SBM requires m = n");
  const Configuration truth = SampleConfiguration(spec, a.n, m, MixSeed(g.seed, 1));
  const ObservationMatrix x = SampleObservations(spec, truth, MixSeed(g.seed, 2));
  if (sink.to_stdout() && sink.json_format()) {
    json j;
    j["index_set"] = std::string(IndexSetName(x.index_set()));
    j["n"] = x.n();
    j["m"] = x.m();
    j["truth"] = ConfigJson(truth);
    json cells = json::array();
    for (const Cell& c : IndexSetCells(x.n(), x.m(), x.index_set())) {
      cells.push_back({c.i + 1, c.j + 1, x.at(c.i, c.j)});
    }
    j["cells"] = std::move(cells);
    sink.Text("", j.dump(2) + "\n");
    return;
  }
  sink.Text("data.csv", ObservationsToCsv(x, spec.family()));
  if (!sink.to_stdout()) sink.Text("truth.json", ConfigurationToJson(truth));
}

struct PosteriorArgs {
  std::string spec;
  std::string data;
  int top = 10;
  double theta_perturb = 0.0;
  std::uint64_t perturb_seed = 0;
  std::uint64_t max_configs = std::uint64_t{1} << 24;
};

ModelSpec PerturbedTheta(const ModelSpec& spec, double eta, std::uint64_t seed) {
  if (eta == 0.0) return spec;
  const SymmetryGroup sigma = DetectSymmetryGroup(spec.pi(), spec.variant());
  const double xi = spec.pi().xi();
  return spec.WithPi(
      PerturbPi(spec.pi().WithXi(1.0), spec.family(), sigma, eta, seed).WithXi(xi));
}

void RunPosterior(const PosteriorArgs& a, const Globals& g, Sink& sink) {
  const ModelSpec spec = LoadSpec(a.spec);
  const ObservationMatrix x = LoadObservations(a.data);
  CheckObservations(x, spec);
  const ModelSpec theta = PerturbedTheta(spec, a.theta_perturb, a.perturb_seed);
  const PosteriorTable table = ExactPosterior(x, theta, {a.max_configs, g.threads});
  const SymmetryGroup sigma = DetectSymmetryGroup(spec.pi(), spec.variant());
  const std::size_t k = static_cast<std::size_t>(std::max(a.top, 0));
  const std::vector<std::size_t> top = table.Top(k);

  if (sink.json_format()) {
    json j;
    j["configurations"] = table.size();
    j["impossible"] = table.impossible_count();
    j["log_normalizer"] = Number(table.log_normalizer());
    j["sigma_size"] = sigma.size();
    json tops = json::array();
    for (std::size_t r = 0; r < top.size(); ++r) {
      const Configuration c = table.ConfigAt(top[r]);
      json e = ConfigJson(c);
      e["rank"] = r + 1;
      e["log_mass"] = Number(table.log_mass(top[r]));
      e["mass"] = table.mass(top[r]);
      tops.push_back(std::move(e));
    }
    j["top"] = std::move(tops);
    json classes = json::array();
    const std::vector<ClassMass> cm = ClassMasses(table, sigma);
    for (std::size_t r = 0; r < std::min(k, cm.size()); ++r) {
      json e;
      e["representative"] = ConfigJson(cm[r].representative);
      e["orbit_size"] = cm[r].orbit_size;
      e["mass"] = cm[r].mass;
      classes.push_back(std::move(e));
    }
    j["classes"] = std::move(classes);
    sink.Text("posterior.json", j.dump(2) + "\n");
    return;
  }
  Table t{{"rank", "z", "w", "log_mass", "mass", "class_mass"}, {}};
  for (std::size_t r = 0; r < top.size(); ++r) {
    const Configuration c = table.ConfigAt(top[r]);
    t.Add({r + 1, Labels(c.z()), Labels(c.w()), Number(table.log_mass(top[r])),
           table.mass(top[r]), PosteriorMassOfClass(table, c, sigma)});
  }
  sink.Result(t, "posterior");
}

struct MapArgs {
  std::string spec;
  std::string data;
  std::string truth;
  std::uint64_t max_configs = std::uint64_t{1} << 24;
  int restarts = 8;
};

void RunMap(const MapArgs& a, const Globals& g, Sink& sink) {
  const ModelSpec spec = LoadSpec(a.spec);
  const ObservationMatrix x = LoadObservations(a.data);
  CheckObservations(x, spec);
  const SymmetryGroup sigma = DetectSymmetryGroup(spec.pi(), spec.variant());
  const std::uint64_t count =
      ConfigurationCount(x.n(), x.m(), spec.Q(), spec.L(), spec.is_sbm());
  std::optional<Configuration> map;
  std::string method;
  double log_posterior = 0.0;
  if (count <= a.max_configs) {
    const PosteriorTable table = ExactPosterior(x, spec, {a.max_configs, g.threads});
    map = MapConfiguration(table);
    log_posterior = table.log_unnormalized(table.IndexOf(*map));
    method = "exact";
  } else {
    const LogDensityTable t(x, spec.pi(), spec.family());
    std::vector<Configuration> starts;
    for (int k = 0; k < std::max(a.restarts, 1); ++k) {
      starts.push_back(SampleConfiguration(spec, x.n(), x.m(), MixSeed(g.seed, 100 + k)));
    }
    map = IcmMap(t, spec, starts);
    log_posterior = TableLogPosterior(t, spec, *map);
    method = "icm";
  }
  std::optional<Misclassification> mc;
  if (!a.truth.empty()) {
    const Configuration truth = LoadConfiguration(a.truth, spec);
    CheckSameShape(*map, truth);
    mc = CountMisclassified(*map, truth, sigma);
  }
  if (sink.json_format()) {
    json j = ConfigJson(*map);
    j["method"] = method;
    j["log_posterior"] = Number(log_posterior);
    if (mc) {
      j["misclassified_raw"] = mc->raw;
      j["misclassified_up_to_equivalence"] = mc->up_to_equivalence;
    }
    sink.Text("map.json", j.dump(2) + "\n");
    return;
  }
  Table t{{"method", "z", "w", "log_posterior", "misclassified_raw",
           "misclassified_up_to_equivalence"},
          {}};
  t.Add({method, Labels(map->z()), Labels(map->w()), Number(log_posterior),
         mc ? json(mc->raw) : json(nullptr), mc ? json(mc->up_to_equivalence) : json(nullptr)});
  sink.Result(t, "map");
}

struct KlArgs {
  std::string spec;
  std::string family;
  std::string p;
  std::string q;
};

void RunKl(const KlArgs& a, const Globals&, Sink& sink) {
  Table t{{"q", "l", "q2", "l2", "kl"}, {}};
  if (!a.spec.empty()) {
    const ModelSpec spec = LoadSpec(a.spec);
    const ConnectivityMatrix pi = spec.pi().Effective(spec.family());
    for (int q = 0; q < pi.rows(); ++q) {
      for (int l = 0; l < pi.cols(); ++l) {
        for (int q2 = 0; q2 < pi.rows(); ++q2) {
          for (int l2 = 0; l2 < pi.cols(); ++l2) {
            t.Add({q + 1, l + 1, q2 + 1, l2 + 1,
                   KlDivergence(spec.family(), pi.at(q, l), pi.at(q2, l2))});
          }
        }
      }
    }
  } else {
    if (a.family.empty() || a.p.empty() || a.q.empty()) {
      ThrowInvalid("kl needs --spec, or --family with --p and --q");
    }
    const Family family = LoadFamilyArg(a.family);
    const Param p = ParseParam(a.p);
    const Param q = ParseParam(a.q);
    family.CheckBounds(p);
    family.CheckBounds(q);
    t.columns = {"p", "q", "kl"};
    t.Add({a.p, a.q, KlDivergence(family, p, q)});
  }
  sink.Result(t, "kl");
}

struct RateArgs {
  std::string spec;
  std::string family;
  std::string x_grid = "0.05:1:0.05";
  double mu_min = 0.0;
  double xi = 1.0;
  bool bernstein = false;
  double sigma2 = 0.0;
  bool exact_dual = false;
};

void RunRate(const RateArgs& a, const Globals&, Sink& sink) {
  std::optional<Family> family;
  double mu = a.mu_min;
  if (!a.spec.empty()) {
    const ModelSpec spec = LoadSpec(a.spec);
    family = spec.family();
    if (mu == 0.0) mu = spec.mu_min();
  } else if (!a.family.empty()) {
    family = LoadFamilyArg(a.family);
  } else {
    ThrowInvalid("rate needs --spec or --family");
  }
  if (mu == 0.0) mu = 1.0;
  if (!(mu > 0.0 && mu <= 1.0)) ThrowInvalid("--mu-min must lie in (0, 1]");
  RateOptions ro;
  ro.bernstein = a.bernstein;
  ro.xi = a.xi;
  if (a.sigma2 > 0.0) ro.gauss_scale_sigma2 = a.sigma2;
  ro.gauss_scale_exact_dual = a.exact_dual;
  const RateFunction psi = DefaultRateFunction(*family, mu, ro);
  Table t{{"x", "psi_star", "exact_chernoff"}, {}};
  for (double x : ParseRealGrid(a.x_grid)) {
    t.Add({x, Number(psi(x)), Number(ExactChernoffRate(*family, mu, x, a.xi))});
  }
  sink.Result(t, "rate");
}

struct BoundsArgs {
  std::string spec;
  double eta = 0.0;
  std::string n_grid = "10:100:10";
  std::string m_rule = "equal";
  bool sparse_form = false;
  bool bernstein = false;
};

void RunBounds(const BoundsArgs& a, const Globals&, Sink& sink) {
  const ModelSpec spec = LoadSpec(a.spec);
  BoundOptions bo;
  bo.sparse_form = a.sparse_form;
  bo.rate.bernstein = a.bernstein;
  const BoundReport r = TheoremConstants(spec, a.eta, bo);
  const MRule rule = ParseMRuleArg(a.m_rule);
  Table t{{"n", "m", "c", "C", "K", "a_nm", "b_nm", "eps_nm"}, {}};
  for (int n : ParseIntGrid(a.n_grid)) {
    const int m = spec.is_sbm() ? n : ApplyMRule(rule, n);
    t.Add({n, m, r.c, r.C, r.K, Number(r.a_nm(n, m)), Number(r.b_nm(n, m)),
           Number(r.eps_nm(n, m))});
  }
  sink.Result(t, "bounds");
}

struct VerifyArgs {
  std::string spec;
  int n = 4;
  int m = 0;
  int Q = 0;
  int L = 0;
  double eta = 0.0;
  double eta_fraction = -1.0;
  int perturbations = 0;
  std::uint64_t max_configs = 1 << 16;
  std::string eps_grid = "0.05:0.5:0.05";
  int replicates = 10000;
  bool bernstein = false;
};

ModelSpec LoadVerifySpec(const VerifyArgs& a, int& m) {
  const ModelSpec spec = LoadSpec(a.spec);
  if (a.Q && a.Q != spec.Q()) ThrowInvalid("--Q disagrees with the spec");
  if (a.L && a.L != spec.L()) ThrowInvalid("--L disagrees with the spec");
  m = spec.is_sbm() ? a.n : (a.m > 0 ? a.m : a.n);
  return spec;
}

ExhaustiveOptions MakeExhaustive(const VerifyArgs& a, const ModelSpec& spec, int m,
                                 const Globals& g) {
  ExhaustiveOptions o;
  o.n = a.n;
  o.m = m;
  o.eta = a.eta;
  if (a.eta_fraction >= 0.0) {
    const BoundReport r = TheoremConstants(spec, 0.0);
    o.eta = a.eta_fraction * r.c / (2.0 * r.L0);
  }
  o.perturbations = a.perturbations;
  o.seed = g.seed;
  o.max_configs = a.max_configs;
  o.threads = g.threads;
  return o;
}

void RunDifferenceCount(const VerifyArgs& a, const Globals& g, Sink& sink) {
  int m = 0;
  const ModelSpec spec = LoadVerifySpec(a, m);
  ExhaustiveOptions o = MakeExhaustive(a, spec, m, g);
  o.perturbations = 0;
  o.eta = 0.0;
  Table t{{"ref", "config", "r1", "r2", "lhs", "rhs", "holds"}, {}};
  RunExhaustiveChecks(spec, o, [&](const DifferenceCountRow& row) {
    t.Add({row.ref_index, row.config_index, row.check.r1, row.check.r2,
           row.check.lhs, row.check.rhs, row.check.holds});
  });
  sink.Result(t, "lemma_diff");
}

void RunSandwichCheck(const VerifyArgs& a, const Globals& g, Sink& sink) {
  int m = 0;
  const ModelSpec spec = LoadVerifySpec(a, m);
  const ExhaustiveOptions o = MakeExhaustive(a, spec, m, g);
  const ExhaustiveReport r = RunExhaustiveChecks(spec, o);
  double max_dist = 0.0;
  for (double d : r.pi_distances) max_dist = std::max(max_dist, d);
  Table t{{"n", "m", "eta", "perturbations", "max_pi_distance", "references",
           "pairs", "diff_count_violations", "diff_count_worst_slack",
           "sandwich_lower_violations", "sandwich_upper_violations",
           "sandwich_worst_lower_slack", "sandwich_worst_upper_slack"},
          {}};
  t.Add({o.n, o.m, o.eta, o.perturbations, max_dist, r.references, r.pairs,
         r.diff_count_violations, r.diff_count_worst_slack, r.sandwich_lower_violations,
         r.sandwich_upper_violations, r.sandwich_worst_lower_slack, r.sandwich_worst_upper_slack});
  sink.Result(t, "prop1");
}

void RunConcentration(const VerifyArgs& a, const Globals& g, Sink& sink) {
  int m = 0;
  const ModelSpec spec = LoadVerifySpec(a, m);
  ConcentrationOptions o;
  o.eps_grid = ParseRealGrid(a.eps_grid);
  o.replicates = a.replicates;
  o.seed = g.seed;
  o.threads = g.threads;
  o.rate.bernstein = a.bernstein;
  const auto pairs = DefaultConcentrationPairs(spec, a.n, m, g.seed);
  Table t{{"pair", "eps", "r1", "r2", "scale", "expected_delta", "exceed",
           "replicates", "frequency", "bound", "slack", "violation"},
          {}};
  for (const ConcentrationRow& r : RunConcentrationCheck(spec, pairs, o)) {
    t.Add({r.pair, r.eps, r.r1, r.r2, r.scale, r.expected_delta, r.exceed,
           r.replicates, r.frequency, Number(r.bound), r.slack, r.violation});
  }
  sink.Result(t, "concentration");
}

struct SweepArgs {
  std::string plan;
};

void RunSweepCommand(const SweepArgs& a, bool sparse, const Globals& g,
                     const CLI::App& root, Sink& sink) {
  ExperimentPlan plan = LoadPlan(a.plan);
  if (g.seed_given) plan.master_seed = g.seed;
  if (root.get_option("--threads")->count() > 0) plan.threads = g.threads;
  const ExperimentResult result = sparse ? RunSparseSweep(plan) : RunConvergenceSweep(plan);
  if (sink.to_stdout()) {
    sink.Text("", ResultRowsCsv(result));
  } else {
    WriteExperiment(g.out, plan, result);
  }
}

void EmitError(std::ostream& err, std::string_view kind, const std::string& message,
               int code) {
  json j;
  j["error"] = std::string(kind);
  j["message"] = message;
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

}  // namespace

std::string VersionString() {
  return std::string("blockpost ") + kToolVersion + " (schema " +
         std::to_string(kSchemaVersion) + ")";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kTheoryViolation:
      return 2;
    case ErrorKind::kCapExceeded:
      return 3;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kIo:
      return 1;
  }
  return 1;
}

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Latent and stochastic block models: simulation, exact posteriors, "
               "theorem constants and verification sweeps.",
               "blockpost"};
  app.set_version_flag("--version", VersionString());
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Master seed; drawn from entropy and recorded when absent");
  app.add_option("--out", g.out, "Output directory, or '-' for standard output")
      ->capture_default_str();
  app.add_option("--format", g.format, "Result format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (default: logical cores)")
      ->check(CLI::NonNegativeNumber);

  std::function<void(Sink&)> action;

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Sample a configuration and a data matrix");
  c_sim->add_option("--spec", sim.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--n", sim.n, "Rows (nodes for SBM)")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--m", sim.m, "Columns (defaults to n)")->check(CLI::NonNegativeNumber);
  c_sim->callback([&] { action = [&](Sink& s) { RunSimulate(sim, g, s); }; });

  PosteriorArgs post;
  auto* c_post = app.add_subcommand("posterior", "Exact groups posterior by enumeration");
  c_post->add_option("--spec", post.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  c_post->add_option("--data", post.data, "Observation CSV")->required()->check(CLI::ExistingFile);
  c_post->add_option("--top", post.top, "Number of configurations and classes to report")
      ->capture_default_str();
  c_post->add_option("--theta-perturb", post.theta_perturb,
                     "Evaluate at a connectivity matrix perturbed within this sup-radius")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  c_post->add_option("--perturb-seed", post.perturb_seed, "Seed of the perturbation")
      ->capture_default_str();
  c_post->add_option("--max-configs", post.max_configs, "Enumeration cap")->capture_default_str();
  c_post->callback([&] { action = [&](Sink& s) { RunPosterior(post, g, s); }; });

  MapArgs map;
  auto* c_map = app.add_subcommand("map", "MAP configuration, optionally scored against a truth");
  c_map->add_option("--spec", map.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  c_map->add_option("--data", map.data, "Observation CSV")->required()->check(CLI::ExistingFile);
  c_map->add_option("--truth", map.truth, "Configuration JSON to score against")
      ->check(CLI::ExistingFile);
  c_map->add_option("--max-configs", map.max_configs,
                    "Exact enumeration cap; coordinate ascent beyond it")
      ->capture_default_str();
  c_map->add_option("--restarts", map.restarts, "Random starts for coordinate ascent")
      ->capture_default_str();
  c_map->callback([&] { action = [&](Sink& s) { RunMap(map, g, s); }; });

  KlArgs kl;
  auto* c_kl = app.add_subcommand("kl", "Kullback-Leibler divergences");
  c_kl->add_option("--spec", kl.spec, "All ordered pairs of effective entries of this spec")
      ->check(CLI::ExistingFile);
  c_kl->add_option("--family", kl.family, "Family JSON object or file");
  c_kl->add_option("--p", kl.p, "First parameter, comma-separated coordinates");
  c_kl->add_option("--q", kl.q, "Second parameter, comma-separated coordinates");
  c_kl->callback([&] { action = [&](Sink& s) { RunKl(kl, g, s); }; });

  RateArgs rate;
  auto* c_rate = app.add_subcommand("rate", "Closed-form rate function against the exact Chernoff rate");
  c_rate->add_option("--spec", rate.spec, "Take the family and mu_min from a spec")
      ->check(CLI::ExistingFile);
  c_rate->add_option("--family", rate.family, "Family JSON object or file");
  c_rate->add_option("--x-grid", rate.x_grid, "a:b:step or comma list")->capture_default_str();
  c_rate->add_option("--mu-min", rate.mu_min, "Smallest group proportion (default: spec, else 1)");
  c_rate->add_option("--xi", rate.xi, "Sparsity scale of the parameter box")->capture_default_str();
  c_rate->add_flag("--bernstein", rate.bernstein, "Binary: Bernstein form instead of Hoeffding");
  c_rate->add_option("--sigma2", rate.sigma2, "Gaussian scale: free variance constant (default pi_min)");
  c_rate->add_flag("--exact-dual", rate.exact_dual, "Gaussian scale: exact dual form");
  c_rate->callback([&] { action = [&](Sink& s) { RunRate(rate, g, s); }; });

  BoundsArgs bounds;
  auto* c_bounds = app.add_subcommand("bounds", "Theorem constants and finite-n bounds");
  c_bounds->add_option("--spec", bounds.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  c_bounds->add_option("--eta", bounds.eta, "Perturbation radius, 0 <= eta < c/(2 L0)")
      ->capture_default_str();
  c_bounds->add_option("--n-grid", bounds.n_grid, "a:b:step or comma list")->capture_default_str();
  c_bounds->add_option("--m-rule", bounds.m_rule, "equal | n_over_log_n")
      ->check(CLI::IsMember({"equal", "n_over_log_n"}))
      ->capture_default_str();
  c_bounds->add_flag("--sparse-form", bounds.sparse_form, "Sparse-regime constants at any xi");
  c_bounds->add_flag("--bernstein", bounds.bernstein, "Binary: Bernstein rate");
  c_bounds->callback([&] { action = [&](Sink& s) { RunBounds(bounds, g, s); }; });

  VerifyArgs ver;
  auto* c_verify = app.add_subcommand("verify", "Exhaustive and Monte Carlo checks");
  c_verify->require_subcommand(1);
  const auto add_common = [&](CLI::App* c) {
    c->add_option("--spec", ver.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--n", ver.n, "Rows")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--m", ver.m, "Columns (defaults to n)");
    c->add_option("--Q", ver.Q, "Row groups; must match the spec");
    c->add_option("--L", ver.L, "Column groups; must match the spec");
  };
  auto* v_lemma = c_verify->add_subcommand("lemma-diff", "Difference-count bound over all pairs");
  add_common(v_lemma);
  v_lemma->add_option("--max-configs", ver.max_configs, "Enumeration cap")->capture_default_str();
  v_lemma->callback([&] { action = [&](Sink& s) { RunDifferenceCount(ver, g, s); }; });

  auto* v_prop = c_verify->add_subcommand("prop1", "Conditional-expectation sandwich over all pairs");
  add_common(v_prop);
  v_prop->add_option("--eta", ver.eta, "Perturbation radius")->capture_default_str();
  v_prop->add_option("--eta-fraction", ver.eta_fraction,
                     "Radius as a fraction of c/(2 L0); overrides --eta");
  v_prop->add_option("--perturbations", ver.perturbations, "Perturbed matrices to test")
      ->capture_default_str();
  v_prop->add_option("--max-configs", ver.max_configs, "Enumeration cap")->capture_default_str();
  v_prop->callback([&] { action = [&](Sink& s) { RunSandwichCheck(ver, g, s); }; });

  auto* v_conc = c_verify->add_subcommand("concentration", "Monte Carlo tail frequency against the bound");
  add_common(v_conc);
  v_conc->add_option("--eps-grid", ver.eps_grid, "a:b:step or comma list")->capture_default_str();
  v_conc->add_option("--replicates", ver.replicates, "Replicates per pair")->capture_default_str();
  v_conc->add_flag("--bernstein", ver.bernstein, "Binary: Bernstein rate");
  v_conc->callback([&] { action = [&](Sink& s) { RunConcentration(ver, g, s); }; });

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Monte Carlo sweeps over a grid of sizes");
  c_sweep->require_subcommand(1);
  auto* s_conv = c_sweep->add_subcommand("convergence", "Dense sweep");
  auto* s_sparse = c_sweep->add_subcommand("sparse", "Sweep with xi-scaled connectivity");
  for (CLI::App* s : {s_conv, s_sparse}) {
    s->add_option("--plan", sweep.plan, "Plan JSON")->required()->check(CLI::ExistingFile);
  }
  s_conv->callback([&] {
    action = [&](Sink& s) { RunSweepCommand(sweep, false, g, app, s); };
  });
  s_sparse->callback([&] {
    action = [&](Sink& s) { RunSweepCommand(sweep, true, g, app, s); };
  });

  for (CLI::App* sub : {c_sim, c_post, c_map, c_kl, c_rate, c_bounds, c_verify, v_lemma,
                        v_prop, v_conc, c_sweep, s_conv, s_sparse}) {
    sub->fallthrough();
  }

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    EmitError(err, "usage", e.what(), 1);
    return 1;
  }

  std::string seed_source = "flag";
  g.seed_given = app.get_option("--seed")->count() > 0;
  if (!g.seed_given) {
    std::random_device rd;
    g.seed = (std::uint64_t{rd()} << 32) ^ rd();
    seed_source = "entropy";
  }
  if (g.threads <= 0) g.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  try {
    Sink sink(g, out);
    action(sink);
    const CLI::App* leaf = Leaf(&app);
    json run;
    run["tool"] = "blockpost";
    run["version"] = kToolVersion;
    run["schema_version"] = kSchemaVersion;
    run["command"] = CommandPath(leaf);
    run["argv"] = args;
    run["seed"] = g.seed;
    run["seed_source"] = seed_source;
    run["threads"] = g.threads;
    run["format"] = g.format;
    run["out"] = g.out;
    run["options"] = ResolvedOptions(leaf);
    sink.Sidecar(run);
  } catch (const Error& e) {
    const int code = ExitCodeFor(e.kind());
    EmitError(err, ErrorKindName(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    EmitError(err, "internal", e.what(), 1);
    return 1;
  }
  return 0;
}

}  // namespace blockpost::cli
