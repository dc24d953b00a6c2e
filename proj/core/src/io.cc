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

#include "blockpost/io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "blockpost/error.h"
#include "json.hpp"

namespace blockpost {
namespace {

using nlohmann::json;

double GetNumber(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    ThrowInvalid(std::string("spec: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

int GetInt(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    ThrowInvalid(std::string("spec: missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

Family ParseFamily(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    ThrowInvalid("spec: family must be an object with a 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli") return Family::Bernoulli(GetNumber(j, "a"));
  if (kind == "binomial") {
    return Family::Binomial(GetInt(j, "trials"), GetNumber(j, "a"));
  }
  if (kind == "multinomial") {
    return Family::Multinomial(GetInt(j, "levels"), GetNumber(j, "a"));
  }
  if (kind == "poisson") {
    return Family::Poisson(GetNumber(j, "min"), GetNumber(j, "max"));
  }
  if (kind == "gauss_location") {
    return Family::GaussLocation(GetNumber(j, "variance"), GetNumber(j, "min"),
                                 GetNumber(j, "max"));
  }
  if (kind == "gauss_scale") {
    return Family::GaussScale(GetNumber(j, "mean"), GetNumber(j, "min"),
                              GetNumber(j, "max"));
  }
  if (kind == "zero_truncated_poisson") {
    return Family::ZeroTruncatedPoisson(GetNumber(j, "min"),
                                        GetNumber(j, "max"));
  }
  if (kind == "zero_inflated") {
    if (!j.contains("inner")) ThrowInvalid("spec: zero_inflated needs 'inner'");
    return Family::ZeroInflated(GetNumber(j, "a"), ParseFamily(j.at("inner")));
  }
  ThrowInvalid("spec: unknown family kind '" + kind + "'");
}

json FamilyToJson(const Family& f) {
  json j;
  j["kind"] = std::string(f.name());
  switch (f.kind()) {
    case FamilyKind::kBernoulli:
      j["a"] = f.a();
      break;
    case FamilyKind::kBinomial:
      j["trials"] = f.trials();
      j["a"] = f.a();
      break;
    case FamilyKind::kMultinomial:
      j["levels"] = f.levels();
      j["a"] = f.a();
      break;
    case FamilyKind::kGaussLocation:
      j["variance"] = f.variance();
      j["min"] = f.bounds().lo;
      j["max"] = f.bounds().hi;
      break;
    case FamilyKind::kGaussScale:
      j["mean"] = f.mean();
      j["min"] = f.bounds().lo;
      j["max"] = f.bounds().hi;
      break;
    case FamilyKind::kPoisson:
    case FamilyKind::kZeroTruncatedPoisson:
      j["min"] = f.bounds().lo;
      j["max"] = f.bounds().hi;
      break;
    case FamilyKind::kZeroInflated:
      j["a"] = f.a();
      j["inner"] = FamilyToJson(f.inner());
      break;
  }
  return j;
}

ModelVariant ParseVariant(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "lbm") return ModelVariant::Lbm();
    ThrowInvalid("spec: variant string must be 'lbm'; SBM needs an object");
  }
  if (!j.is_object() || j.value("kind", "") != "sbm") {
    ThrowInvalid("spec: variant must be \"lbm\" or {\"kind\": \"sbm\", ...}");
  }
  if (!j.contains("directed") || !j.contains("self_loops")) {
    ThrowInvalid("spec: SBM variant needs 'directed' and 'self_loops'");
  }
  return ModelVariant::Sbm(j.at("directed").get<bool>(),
                           j.at("self_loops").get<bool>());
}

json VariantToJson(const ModelVariant& v) {
  if (!v.is_sbm()) return "lbm";
  return json{{"kind", "sbm"}, {"directed", v.directed},
              {"self_loops", v.self_loops}};
}

Param ParseEntry(const json& e, const Family& family) {
  if (e.is_number()) return Param{e.get<double>()};
  if (e.is_array()) {
    std::vector<double> coords;
    for (const json& c : e) {
      if (!c.is_number()) ThrowInvalid("spec: pi entries must be numeric");
      coords.push_back(c.get<double>());
    }
    if (static_cast<int>(coords.size()) != family.param_dim()) {
      ThrowInvalid("spec: pi entry has " + std::to_string(coords.size()) +
                   " coordinates, family expects " +
                   std::to_string(family.param_dim()));
    }
    return Param(std::move(coords));
  }
  ThrowInvalid("spec: pi entries must be numbers or arrays");
}

json EntryToJson(const Param& p) {
  if (p.size() == 1) return p[0];
  return json(p.coords());
}

std::vector<double> GetVector(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    ThrowInvalid(std::string("spec: '") + key + "' must be an array");
  }
  std::vector<double> out;
  for (const json& x : j.at(key)) {
    if (!x.is_number()) ThrowInvalid(std::string("spec: '") + key + "' must be numeric");
    out.push_back(x.get<double>());
  }
  return out;
}

json ParseJson(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    ThrowInvalid(std::string(what) + ": " + e.what());
  }
}

std::vector<int> ParseLabels(const json& j, const char* key, int groups) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    ThrowInvalid(std::string("configuration: '") + key + "' must be an array");
  }
  std::vector<int> out;
  for (const json& x : j.at(key)) {
    if (!x.is_number_integer()) {
      ThrowInvalid("configuration: labels must be integers");
    }
    const int v = x.get<int>();
    if (v < 1 || v > groups) {
      ThrowInvalid("configuration: label " + std::to_string(v) +
                   " outside 1.." + std::to_string(groups));
    }
    out.push_back(v - 1);
  }
  return out;
}

}  // namespace

std::string FormatShortest(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

std::string Format17(double x) {
  char buf[64];
  const auto result =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowIo("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) ThrowIo("write failed for '" + path.string() + "'");
}

static ModelSpec ParseSpecObject(std::string_view text) {
  const json j = ParseJson(text, "spec");
  if (!j.is_object()) ThrowInvalid("spec: top level must be an object");
  static const std::set<std::string> kKnown = {
      "schema_version", "variant", "Q", "L", "alpha", "beta",
      "family", "pi", "xi"};
  for (const auto& item : j.items()) {
    if (!kKnown.contains(item.key())) {
      ThrowInvalid("spec: unknown key '" + item.key() + "'");
    }
  }
  if (j.contains("schema_version") &&
      j.at("schema_version").get<int>() != kSchemaVersion) {
    ThrowInvalid("spec: unsupported schema_version");
  }
  if (!j.contains("variant")) ThrowInvalid("spec: missing 'variant'");
  const ModelVariant variant = ParseVariant(j.at("variant"));
  const int Q = GetInt(j, "Q");
  const int L = j.contains("L") ? GetInt(j, "L") : Q;
  std::vector<double> alpha = GetVector(j, "alpha");
  std::vector<double> beta;
  if (j.contains("beta")) {
    beta = GetVector(j, "beta");
  } else if (!variant.is_sbm()) {
    ThrowInvalid("spec: LBM requires 'beta'");
  }
  if (static_cast<int>(alpha.size()) != Q) {
    ThrowInvalid("spec: alpha length differs from Q");
  }
  if (!beta.empty() && static_cast<int>(beta.size()) != L) {
    ThrowInvalid("spec: beta length differs from L");
  }
  if (variant.is_sbm() && Q != L) ThrowInvalid("spec: SBM requires Q = L");
  if (!j.contains("family")) ThrowInvalid("spec: missing 'family'");
  const Family family = ParseFamily(j.at("family"));
  if (!j.contains("pi") || !j.at("pi").is_array()) {
    ThrowInvalid("spec: 'pi' must be an array");
  }
  const json& pij = j.at("pi");
  // Either Q rows of L entries or a flat row-major list of Q*L entries.
  const bool scalar_entries = family.param_dim() == 1;
  const auto is_row = [&](const json& row) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(L)) {
      return false;
    }
    for (const json& e : row) {
      if (scalar_entries ? !e.is_number() : !e.is_array()) return false;
    }
    return true;
  };
  bool nested = pij.size() == static_cast<std::size_t>(Q);
  for (std::size_t q = 0; nested && q < pij.size(); ++q) nested = is_row(pij[q]);
  std::vector<Param> entries;
  if (nested) {
    for (const json& row : pij) {
      for (const json& e : row) entries.push_back(ParseEntry(e, family));
    }
  } else {
    if (pij.size() != static_cast<std::size_t>(Q) * L) {
      ThrowInvalid("spec: pi must have Q rows of L entries or Q*L entries");
    }
    for (const json& e : pij) entries.push_back(ParseEntry(e, family));
  }
  const double xi = j.contains("xi") ? GetNumber(j, "xi") : 1.0;
  return ModelSpec(variant, std::move(alpha), std::move(beta),
                   ConnectivityMatrix(Q, L, std::move(entries), xi), family);
}

ModelSpec ParseSpecJson(std::string_view text) {
  try {
    return ParseSpecObject(text);
  } catch (const json::exception& e) {
    ThrowInvalid(std::string("spec: ") + e.what());
  }
}

ModelSpec LoadSpec(const std::filesystem::path& path) {
  return ParseSpecJson(ReadFile(path));
}

Family ParseFamilyJson(std::string_view text) {
  try {
    const json j = ParseJson(text, "family");
    if (!j.is_object()) ThrowInvalid("family: expected an object");
    return ParseFamily(j);
  } catch (const json::exception& e) {
    ThrowInvalid(std::string("family: ") + e.what());
  }
}

std::string FamilyJson(const Family& family) { return FamilyToJson(family).dump(); }

std::string SpecToJson(const ModelSpec& spec) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["variant"] = VariantToJson(spec.variant());
  j["Q"] = spec.Q();
  j["L"] = spec.L();
  j["alpha"] = spec.alpha();
  j["beta"] = spec.beta();
  j["family"] = FamilyToJson(spec.family());
  json rows = json::array();
  for (int q = 0; q < spec.Q(); ++q) {
    json row = json::array();
    for (int l = 0; l < spec.L(); ++l) row.push_back(EntryToJson(spec.pi().at(q, l)));
    rows.push_back(row);
  }
  j["pi"] = rows;
  j["xi"] = spec.pi().xi();
  return j.dump(2) + "\n";
}

std::string ConfigurationToJson(const Configuration& config) {
  json j;
  std::vector<int> z(config.z().begin(), config.z().end());
  for (int& v : z) ++v;
  j["z"] = z;
  if (!config.tied()) {
    std::vector<int> w(config.w().begin(), config.w().end());
    for (int& v : w) ++v;
    j["w"] = w;
  }
  return j.dump() + "\n";
}

Configuration ParseConfigurationJson(std::string_view text,
                                     const ModelSpec& spec) try {
  const json j = ParseJson(text, "configuration");
  if (!j.is_object()) ThrowInvalid("configuration: expected an object");
  std::vector<int> z = ParseLabels(j, "z", spec.Q());
  if (spec.is_sbm()) {
    if (j.contains("w") && ParseLabels(j, "w", spec.L()) != z) {
      ThrowInvalid("configuration: SBM requires w = z");
    }
    return Configuration::Sbm(std::move(z), spec.Q());
  }
  return Configuration::Lbm(std::move(z), spec.Q(), ParseLabels(j, "w", spec.L()),
                            spec.L());
} catch (const json::exception& e) {
  ThrowInvalid(std::string("configuration: ") + e.what());
}

Configuration LoadConfiguration(const std::filesystem::path& path,
                                const ModelSpec& spec) {
  return ParseConfigurationJson(ReadFile(path), spec);
}

void WriteObservationsCsv(std::ostream& out, const ObservationMatrix& x,
                          const Family& family) {
  const bool integral = family.is_discrete();
  out << "# index_set=" << IndexSetName(x.index_set()) << "\n";
  out << "i,j,value\n";
  for (const Cell& c : IndexSetCells(x.n(), x.m(), x.index_set())) {
    const double v = x.raw(c.i, c.j);
    out << (c.i + 1) << ',' << (c.j + 1) << ',';
    if (integral) {
      out << static_cast<long long>(v);
    } else {
      out << Format17(v);
    }
    out << '\n';
  }
}

std::string ObservationsToCsv(const ObservationMatrix& x, const Family& family) {
  std::ostringstream os;
  WriteObservationsCsv(os, x, family);
  return os.str();
}

ObservationMatrix ReadObservationsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) ThrowIo("observations: empty input");
  constexpr std::string_view kPrefix = "# index_set=";
  if (line.rfind(kPrefix, 0) != 0) {
    ThrowIo("observations: first line must be '# index_set=<kind>'");
  }
  std::string kind_name = line.substr(kPrefix.size());
  while (!kind_name.empty() && (kind_name.back() == '\r' || kind_name.back() == ' ')) {
    kind_name.pop_back();
  }
  const IndexSetKind kind = ParseIndexSet(kind_name);
  struct Triple {
    int i;
    int j;
    double v;
  };
  std::vector<Triple> triples;
  int max_i = 0;
  int max_j = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("i,j", 0) == 0) continue;
    Triple t{};
    const char* p = line.data();
    const char* end = p + line.size();
    auto r1 = std::from_chars(p, end, t.i);
    if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ',') {
      ThrowIo("observations: bad row at line " + std::to_string(line_no));
    }
    auto r2 = std::from_chars(r1.ptr + 1, end, t.j);
    if (r2.ec != std::errc() || r2.ptr == end || *r2.ptr != ',') {
      ThrowIo("observations: bad row at line " + std::to_string(line_no));
    }
    auto r3 = std::from_chars(r2.ptr + 1, end, t.v);
    if (r3.ec != std::errc() || r3.ptr != end) {
      ThrowIo("observations: bad value at line " + std::to_string(line_no));
    }
    if (t.i < 1 || t.j < 1) ThrowIo("observations: indices are 1-based");
    max_i = std::max(max_i, t.i);
    max_j = std::max(max_j, t.j);
    triples.push_back(t);
  }
  if (triples.empty()) ThrowIo("observations: no cells");
  int n = max_i;
  int m = max_j;
  if (kind != IndexSetKind::kFull) {
    n = m = std::max(max_i, max_j);
  }
  ObservationMatrix x(n, m, kind);
  std::set<std::pair<int, int>> seen;
  for (const Triple& t : triples) {
    if (!x.Contains(t.i - 1, t.j - 1)) {
      ThrowIo("observations: cell (" + std::to_string(t.i) + "," +
              std::to_string(t.j) + ") outside index set " + kind_name);
    }
    if (!seen.insert({t.i, t.j}).second) {
      ThrowIo("observations: duplicate cell (" + std::to_string(t.i) + "," +
              std::to_string(t.j) + ")");
    }
    x.set(t.i - 1, t.j - 1, t.v);
  }
  if (seen.size() != x.size()) {
    ThrowIo("observations: " + std::to_string(seen.size()) + " cells given, index set has " +
            std::to_string(x.size()));
  }
  return x;
}

ObservationMatrix LoadObservations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowIo("cannot open '" + path.string() + "'");
  return ReadObservationsCsv(in);
}

void CheckObservations(const ObservationMatrix& x, const ModelSpec& spec) {
  if (x.index_set() != spec.variant().index_set()) {
    ThrowInvalid("observations use index set '" +
                 std::string(IndexSetName(x.index_set())) +
                 "' but the model requires '" +
                 std::string(IndexSetName(spec.variant().index_set())) + "'");
  }
  if (spec.is_sbm() && x.n() != x.m()) ThrowInvalid("SBM data must be square");
  for (const Cell& c : IndexSetCells(x.n(), x.m(), x.index_set())) {
    if (!spec.family().InSupport(x.raw(c.i, c.j))) {
      ThrowInvalid("observation (" + std::to_string(c.i + 1) + "," +
                   std::to_string(c.j + 1) + ") = " +
                   FormatShortest(x.raw(c.i, c.j)) + " outside the " +
                   std::string(spec.family().name()) + " support");
    }
  }
}

}  // namespace blockpost
