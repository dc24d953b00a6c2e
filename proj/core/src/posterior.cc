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

#include "blockpost/posterior.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "blockpost/divergence.h"
#include "blockpost/error.h"
#include "parallel.h"

namespace blockpost {
namespace {

using internal::ParallelFor;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t SaturatingPow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int k = 0; k < exp; ++k) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r *= base;
  }
  return r;
}

std::vector<double> LogWeights(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  std::transform(p.begin(), p.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

void EnumerateLbm(const LogDensityTable& table, const ModelSpec& theta,
                  int threads, std::vector<double>& out) {
  const int n = table.n();
  const int m = table.m();
  const int Q = theta.Q();
  const int L = theta.L();
  const std::vector<double> log_alpha = LogWeights(theta.alpha());
  const std::vector<double> log_beta = LogWeights(theta.beta());
  const std::size_t z_count = SaturatingPow(Q, n);
  const std::size_t w_count = SaturatingPow(L, m);

  ParallelFor(z_count, threads, [&](std::size_t z_rank) {
    std::vector<int> z(n);
    std::size_t rest = z_rank;
    for (int i = n - 1; i >= 0; --i) {
      z[i] = static_cast<int>(rest % Q);
      rest /= Q;
    }
    double z_prior = 0.0;
    for (int i = 0; i < n; ++i) z_prior += log_alpha[z[i]];
    // column_term[j * L + l]: contribution of column j placed in group l.
    std::vector<double> column_term(std::size_t(m) * L, 0.0);
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < L; ++l) {
        double s = log_beta[l];
        for (int i = 0; i < n; ++i) s += table.at(i, j, z[i] * L + l);
        column_term[std::size_t(j) * L + l] = s;
      }
    }
    double* dst = out.data() + z_rank * w_count;
    std::vector<double> partial(m + 1);
    partial[0] = z_prior;
    std::vector<int> w(m, 0);
    // Odometer over w, last column fastest; partial[j] covers columns < j.
    for (int j = 0; j < m; ++j) partial[j + 1] = partial[j] + column_term[std::size_t(j) * L];
    std::size_t idx = 0;
    while (true) {
      dst[idx++] = partial[m];
      int j = m - 1;
      while (j >= 0 && w[j] == L - 1) {
        w[j] = 0;
        --j;
      }
      if (j < 0) break;
      ++w[j];
      for (int k = j; k < m; ++k) {
        partial[k + 1] = partial[k] + column_term[std::size_t(k) * L + w[k]];
      }
    }
  });
}

void EnumerateSbm(const LogDensityTable& table, const ModelSpec& theta,
                  const ObservationMatrix& x, int threads,
                  std::vector<double>& out) {
  const int n = table.n();
  const int Q = theta.Q();
  const std::vector<double> log_alpha = LogWeights(theta.alpha());

  // Contribution of node i in group q given the labels of nodes < i.
  auto contribution = [&](int i, int q, const std::vector<int>& z) {
    double s = log_alpha[q];
    for (int j = 0; j < i; ++j) {
      if (x.Contains(i, j)) s += table.at(i, j, q * Q + z[j]);
      if (x.Contains(j, i)) s += table.at(j, i, z[j] * Q + q);
    }
    if (x.Contains(i, i)) s += table.at(i, i, q * Q + q);
    return s;
  };

  int depth = 0;
  std::size_t prefixes = 1;
  while (depth < n && prefixes < 64) {
    prefixes *= Q;
    ++depth;
  }
  const std::size_t suffix_count = SaturatingPow(Q, n - depth);

  ParallelFor(prefixes, threads, [&](std::size_t prefix) {
    std::vector<int> z(n, 0);
    std::size_t rest = prefix;
    for (int i = depth - 1; i >= 0; --i) {
      z[i] = static_cast<int>(rest % Q);
      rest /= Q;
    }
    std::vector<double> partial(n + 1);
    partial[0] = 0.0;
    for (int i = 0; i < n; ++i) partial[i + 1] = partial[i] + contribution(i, z[i], z);
    double* dst = out.data() + prefix * suffix_count;
    std::size_t idx = 0;
    while (true) {
      dst[idx++] = partial[n];
      int i = n - 1;
      while (i >= depth && z[i] == Q - 1) {
        z[i] = 0;
        --i;
      }
      if (i < depth) break;
      ++z[i];
      for (int k = i; k < n; ++k) partial[k + 1] = partial[k] + contribution(k, z[k], z);
    }
  });
}

int Hamming(std::span<const int> a, std::span<const int> b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

LogDensityTable::LogDensityTable(const ObservationMatrix& x,
                                 const ConnectivityMatrix& pi,
                                 const Family& family)
    : n_(x.n()), m_(x.m()), k_(static_cast<int>(pi.entries().size())),
      kind_(x.index_set()) {
  const ConnectivityMatrix eff = pi.Effective(family);
  values_.assign(std::size_t(n_) * m_ * k_, 0.0);
  for (const Cell& cell : IndexSetCells(n_, m_, kind_)) {
    const double v = x.raw(cell.i, cell.j);
    double* dst = values_.data() + (std::size_t(cell.i) * m_ + cell.j) * k_;
    for (int k = 0; k < k_; ++k) dst[k] = family.LogDensity(v, eff.entries()[k]);
  }
}

double LogPrior(const Configuration& c, const ModelSpec& theta) {
  double s = 0.0;
  for (int q : c.z()) s += std::log(theta.alpha()[q]);
  if (!c.tied()) {
    for (int l : c.w()) s += std::log(theta.beta()[l]);
  }
  return s;
}

double LogUnnormalizedPosterior(const ObservationMatrix& x,
                                const Configuration& c, const ModelSpec& theta) {
  CheckConfiguration(c, theta);
  if (x.n() != c.n() || x.m() != c.m()) {
    ThrowInvalid("observation matrix does not match the configuration size");
  }
  if (x.index_set() != theta.variant().index_set()) {
    ThrowInvalid("observation index set does not match the model variant");
  }
  const ConnectivityMatrix eff = theta.pi().Effective(theta.family());
  double s = 0.0;
  for (const Cell& cell : IndexSetCells(x.n(), x.m(), x.index_set())) {
    s += theta.family().LogDensity(x.raw(cell.i, cell.j),
                                   eff.at(c.z(cell.i), c.w(cell.j)));
  }
  return s + LogPrior(c, theta);
}

std::uint64_t ConfigurationCount(int n, int m, int Q, int L, bool tied) {
  const std::uint64_t z = SaturatingPow(Q, n);
  if (tied) return z;
  const std::uint64_t w = SaturatingPow(L, m);
  if (w != 0 && z > std::numeric_limits<std::uint64_t>::max() / w) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return z * w;
}

PosteriorTable::PosteriorTable(int n, int m, int Q, int L, bool tied,
                               std::vector<double> log_unnormalized)
    : n_(n), m_(m), q_(Q), l_(L), tied_(tied),
      log_unnormalized_(std::move(log_unnormalized)) {
  if (log_unnormalized_.size() != ConfigurationCount(n, m, Q, L, tied)) {
    ThrowInvalid("posterior table size does not match the configuration count");
  }
  double mx = kNegInf;
  for (double v : log_unnormalized_) {
    if (v == kNegInf) {
      ++impossible_;
    } else {
      mx = std::max(mx, v);
    }
  }
  if (mx == kNegInf) {
    ThrowInvalid("every configuration has zero likelihood");
  }
  double sum = 0.0;
  for (double v : log_unnormalized_) sum += std::exp(v - mx);
  log_normalizer_ = mx + std::log(sum);
}

Configuration ConfigurationAt(std::size_t index, int n, int m, int Q, int L,
                              bool tied) {
  std::vector<int> w;
  if (!tied) {
    w.resize(m);
    for (int j = m - 1; j >= 0; --j) {
      w[j] = static_cast<int>(index % L);
      index /= L;
    }
  }
  std::vector<int> z(n);
  for (int i = n - 1; i >= 0; --i) {
    z[i] = static_cast<int>(index % Q);
    index /= Q;
  }
  if (tied) return Configuration::Sbm(std::move(z), Q);
  return Configuration::Lbm(std::move(z), Q, std::move(w), L);
}

Configuration PosteriorTable::ConfigAt(std::size_t index) const {
  if (index >= size()) ThrowInvalid("configuration index out of range");
  return ConfigurationAt(index, n_, m_, q_, l_, tied_);
}

std::size_t PosteriorTable::IndexOf(const Configuration& c) const {
  if (c.tied() != tied_ || c.n() != n_ || c.m() != m_ || c.Q() != q_ || c.L() != l_) {
    ThrowInvalid("configuration shape does not match the posterior table");
  }
  std::size_t idx = 0;
  for (int q : c.z()) idx = idx * q_ + q;
  if (!tied_) {
    for (int l : c.w()) idx = idx * l_ + l;
  }
  return idx;
}

double PosteriorTable::log_mass(std::size_t index) const {
  return log_unnormalized_.at(index) - log_normalizer_;
}

double PosteriorTable::mass(std::size_t index) const {
  return std::exp(log_mass(index));
}

std::vector<std::size_t> PosteriorTable::Top(std::size_t k) const {
  std::vector<std::size_t> idx(size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double va = log_unnormalized_[a];
                      const double vb = log_unnormalized_[b];
                      return va != vb ? va > vb : a < b;
                    });
  idx.resize(k);
  return idx;
}

PosteriorTable ExactPosterior(const ObservationMatrix& x, const ModelSpec& theta,
                              const PosteriorOptions& options) {
  const bool tied = theta.is_sbm();
  if (x.index_set() != theta.variant().index_set()) {
    ThrowInvalid("observation index set does not match the model variant");
  }
  const std::uint64_t count =
      ConfigurationCount(x.n(), x.m(), theta.Q(), theta.L(), tied);
  if (count > options.max_configs) {
    ThrowCap("exact posterior needs " +
             (count == std::numeric_limits<std::uint64_t>::max()
                  ? std::string("more than 2^64")
                  : std::to_string(count)) +
             " configurations; cap is " + std::to_string(options.max_configs));
  }
  const LogDensityTable table(x, theta.pi(), theta.family());
  std::vector<double> values(count);
  if (tied) {
    EnumerateSbm(table, theta, x, options.threads, values);
  } else {
    EnumerateLbm(table, theta, options.threads, values);
  }
  return PosteriorTable(x.n(), x.m(), theta.Q(), theta.L(), tied, std::move(values));
}

double PosteriorMassOfClass(const PosteriorTable& table, const Configuration& c,
                            const SymmetryGroup& sigma) {
  double s = 0.0;
  for (const Configuration& member : Orbit(c, sigma)) {
    s += table.mass(table.IndexOf(member));
  }
  return s;
}

std::vector<ClassMass> ClassMasses(const PosteriorTable& table,
                                   const SymmetryGroup& sigma) {
  std::map<Configuration, ClassMass> classes;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const Configuration c = table.ConfigAt(k);
    Configuration rep = CanonicalRepresentative(c, sigma);
    auto it = classes.find(rep);
    if (it == classes.end()) {
      const std::size_t orbit = Orbit(rep, sigma).size();
      it = classes.emplace(rep, ClassMass{rep, orbit, 0.0}).first;
    }
    it->second.mass += table.mass(k);
  }
  std::vector<ClassMass> out;
  out.reserve(classes.size());
  for (auto& [rep, cm] : classes) out.push_back(std::move(cm));
  std::stable_sort(out.begin(), out.end(), [](const ClassMass& a, const ClassMass& b) {
    return a.mass > b.mass;
  });
  return out;
}

Configuration MapConfiguration(const PosteriorTable& table) {
  double mx = kNegInf;
  for (std::size_t k = 0; k < table.size(); ++k) {
    mx = std::max(mx, table.log_unnormalized(k));
  }
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (table.log_unnormalized(k) >= mx - kMapTieTolerance) return table.ConfigAt(k);
  }
  return table.ConfigAt(0);
}

double DeltaStatistic(const ObservationMatrix& x, const Configuration& c_star,
                      const Configuration& c, const ConnectivityMatrix& pi,
                      const Family& family) {
  CheckSameShape(c_star, c);
  if (x.n() != c.n() || x.m() != c.m()) {
    ThrowInvalid("observation matrix does not match the configuration size");
  }
  const ConnectivityMatrix eff = pi.Effective(family);
  double s = 0.0;
  for (const Cell& cell : IndexSetCells(x.n(), x.m(), x.index_set())) {
    const Param& p_star = eff.at(c_star.z(cell.i), c_star.w(cell.j));
    const Param& p = eff.at(c.z(cell.i), c.w(cell.j));
    if (p_star == p) continue;
    const double v = x.raw(cell.i, cell.j);
    s += family.LogDensity(v, p_star) - family.LogDensity(v, p);
  }
  return s;
}

double ExpectedDelta(const Configuration& c_star, const Configuration& c,
                     const ConnectivityMatrix& pi,
                     const ConnectivityMatrix& pi_star, const Family& family,
                     IndexSetKind index_set) {
  CheckSameShape(c_star, c);
  const ConnectivityMatrix eff = pi.Effective(family);
  const ConnectivityMatrix eff_star = pi_star.Effective(family);
  double s = 0.0;
  for (const Cell& cell : IndexSetCells(c.n(), c.m(), index_set)) {
    const int qs = c_star.z(cell.i);
    const int ls = c_star.w(cell.j);
    const Param& p = eff.at(qs, ls);
    const Param& pp = eff.at(c.z(cell.i), c.w(cell.j));
    if (p == pp) continue;
    s += CrossTerm(family, p, pp, eff_star.at(qs, ls));
  }
  return s;
}

Misclassification CountMisclassified(const Configuration& c_hat,
                                     const Configuration& c_true,
                                     const SymmetryGroup& sigma) {
  CheckSameShape(c_hat, c_true);
  Misclassification out;
  out.raw = Hamming(c_hat.z(), c_true.z());
  if (!c_hat.tied()) out.raw += Hamming(c_hat.w(), c_true.w());
  out.up_to_equivalence = ConfigDistance(c_hat, c_true, sigma).d;
  return out;
}

}  // namespace blockpost
