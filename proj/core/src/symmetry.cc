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

#include "blockpost/symmetry.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "blockpost/error.h"
#include "blockpost/sampling.h"

namespace blockpost {
namespace {

std::vector<int> IdentityPermutation(int k) {
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

double Factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

bool SameParam(const Param& a, const Param& b, double tol) {
  if (tol == 0.0) return a == b;
  return a.size() == b.size() && SupDistance(a, b) <= tol;
}

// Entry ids such that equal parameters share an id.
std::vector<int> EntryIds(const ConnectivityMatrix& pi) {
  std::vector<int> ids(pi.entries().size());
  std::vector<const Param*> distinct;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const Param& p = pi.entries()[k];
    auto it = std::find_if(distinct.begin(), distinct.end(),
                           [&p](const Param* d) { return *d == p; });
    if (it == distinct.end()) {
      ids[k] = static_cast<int>(distinct.size());
      distinct.push_back(&p);
    } else {
      ids[k] = static_cast<int>(it - distinct.begin());
    }
  }
  return ids;
}

int Hamming(std::span<const int> a, std::span<const int> b,
            const std::vector<int>& perm) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != perm[b[i]];
  return d;
}

// Backtracking over column permutations t compatible with a fixed s.
void ExtendColumns(const ConnectivityMatrix& pi, const std::vector<int>& s,
                   double tol, std::vector<int>& t, std::vector<bool>& used,
                   int l, std::vector<PermutationPair>& out) {
  const int L = pi.cols();
  if (l == L) {
    out.push_back({s, t});
    return;
  }
  for (int cand = 0; cand < L; ++cand) {
    if (used[cand]) continue;
    bool ok = true;
    for (int q = 0; q < pi.rows() && ok; ++q) {
      ok = SameParam(pi.at(s[q], cand), pi.at(q, l), tol);
    }
    if (!ok) continue;
    used[cand] = true;
    t[l] = cand;
    ExtendColumns(pi, s, tol, t, used, l + 1, out);
    used[cand] = false;
  }
}

}  // namespace

PermutationPair IdentityPair(int Q, int L) {
  return {IdentityPermutation(Q), IdentityPermutation(L)};
}

PermutationPair Compose(const PermutationPair& a, const PermutationPair& b) {
  PermutationPair out{std::vector<int>(b.s.size()), std::vector<int>(b.t.size())};
  for (std::size_t q = 0; q < b.s.size(); ++q) out.s[q] = a.s[b.s[q]];
  for (std::size_t l = 0; l < b.t.size(); ++l) out.t[l] = a.t[b.t[l]];
  return out;
}

PermutationPair Inverse(const PermutationPair& p) {
  PermutationPair out{std::vector<int>(p.s.size()), std::vector<int>(p.t.size())};
  for (std::size_t q = 0; q < p.s.size(); ++q) out.s[p.s[q]] = static_cast<int>(q);
  for (std::size_t l = 0; l < p.t.size(); ++l) out.t[p.t[l]] = static_cast<int>(l);
  return out;
}

Configuration Apply(const PermutationPair& p, const Configuration& c) {
  if (static_cast<int>(p.s.size()) != c.Q() ||
      static_cast<int>(p.t.size()) != c.L()) {
    ThrowInvalid("permutation size differs from the group counts");
  }
  std::vector<int> z(c.z().begin(), c.z().end());
  for (int& v : z) v = p.s[v];
  if (c.tied()) return Configuration::Sbm(std::move(z), c.Q());
  std::vector<int> w(c.w().begin(), c.w().end());
  for (int& v : w) v = p.t[v];
  return Configuration::Lbm(std::move(z), c.Q(), std::move(w), c.L());
}

SymmetryGroup::SymmetryGroup(int Q, int L, bool tied,
                             std::vector<PermutationPair> pairs)
    : q_(Q), l_(L), tied_(tied), pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  if (pairs_.empty() || pairs_.front() != IdentityPair(Q, L)) {
    ThrowInvalid("symmetry group must contain the identity pair");
  }
  for (const PermutationPair& p : pairs_) {
    if (tied_ && p.s != p.t) ThrowInvalid("SBM symmetry pairs require s = t");
  }
}

SymmetryGroup SymmetryGroup::Trivial(int Q, int L, bool tied) {
  return SymmetryGroup(Q, L, tied, {IdentityPair(Q, L)});
}

bool SymmetryGroup::Contains(const PermutationPair& p) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), p);
}

bool SymmetryGroup::SatisfiesGroupAxioms() const {
  if (!Contains(IdentityPair(q_, l_))) return false;
  for (const PermutationPair& a : pairs_) {
    if (!Contains(Inverse(a))) return false;
    for (const PermutationPair& b : pairs_) {
      if (!Contains(Compose(a, b))) return false;
    }
  }
  return true;
}

ConnectivityMatrix Permute(const ConnectivityMatrix& pi,
                           const PermutationPair& p) {
  std::vector<Param> entries;
  entries.reserve(pi.entries().size());
  for (int q = 0; q < pi.rows(); ++q) {
    for (int l = 0; l < pi.cols(); ++l) entries.push_back(pi.at(p.s[q], p.t[l]));
  }
  return ConnectivityMatrix(pi.rows(), pi.cols(), std::move(entries), pi.xi());
}

bool FixesMatrix(const ConnectivityMatrix& pi, const PermutationPair& p,
                 double tolerance) {
  for (int q = 0; q < pi.rows(); ++q) {
    for (int l = 0; l < pi.cols(); ++l) {
      if (!SameParam(pi.at(p.s[q], p.t[l]), pi.at(q, l), tolerance)) {
        return false;
      }
    }
  }
  return true;
}

SymmetryGroup DetectSymmetryGroup(const ConnectivityMatrix& pi,
                                  const ModelVariant& variant,
                                  const SymmetryOptions& options) {
  const int Q = pi.rows();
  const int L = pi.cols();
  const bool tied = variant.is_sbm();
  if (tied && Q != L) ThrowInvalid("SBM connectivity matrix must be square");
  if (Q > options.max_groups || L > options.max_groups) {
    ThrowCap("symmetry detection is limited to " +
             std::to_string(options.max_groups) + " groups per side");
  }
  const double candidates = tied ? Factorial(Q) : Factorial(Q) * Factorial(L);
  if (candidates > static_cast<double>(options.max_pairs)) {
    ThrowCap("permutation-pair enumeration exceeds the cap of " +
             std::to_string(options.max_pairs));
  }
  std::vector<PermutationPair> found;
  std::vector<int> s = IdentityPermutation(Q);
  do {
    if (tied) {
      PermutationPair p{s, s};
      if (FixesMatrix(pi, p, options.tolerance)) found.push_back(std::move(p));
      continue;
    }
    std::vector<int> t(L, -1);
    std::vector<bool> used(L, false);
    ExtendColumns(pi, s, options.tolerance, t, used, 0, found);
  } while (std::next_permutation(s.begin(), s.end()));
  return SymmetryGroup(Q, L, tied, std::move(found));
}

bool AreEquivalent(const Configuration& c1, const Configuration& c2,
                   const SymmetryGroup& sigma) {
  return ConfigDistance(c1, c2, sigma).d == 0;
}

Distance ConfigDistance(const Configuration& c1, const Configuration& c2,
                        const SymmetryGroup& sigma) {
  CheckSameShape(c1, c2);
  if (c1.Q() != sigma.Q() || c1.L() != sigma.L() || c1.tied() != sigma.tied()) {
    ThrowInvalid("symmetry group does not match the configuration shape");
  }
  Distance best;
  bool first = true;
  for (const PermutationPair& p : sigma.pairs()) {
    const int r1 = Hamming(c1.z(), c2.z(), p.s);
    const int r2 = c1.tied() ? r1 : Hamming(c1.w(), c2.w(), p.t);
    const int d = c1.tied() ? r1 : r1 + r2;
    if (first || d < best.d) {
      best = Distance{d, p, r1, r2};
      first = false;
      if (d == 0) break;
    }
  }
  return best;
}

std::vector<Configuration> Orbit(const Configuration& c,
                                 const SymmetryGroup& sigma) {
  std::vector<Configuration> out;
  out.reserve(sigma.size());
  for (const PermutationPair& p : sigma.pairs()) out.push_back(Apply(p, c));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Configuration CanonicalRepresentative(const Configuration& c,
                                      const SymmetryGroup& sigma) {
  Configuration best = c;
  for (const PermutationPair& p : sigma.pairs()) {
    Configuration candidate = Apply(p, c);
    if (candidate < best) best = std::move(candidate);
  }
  return best;
}

std::int64_t DiffCount(const Configuration& c1, const Configuration& c2,
                       const ConnectivityMatrix& pi, IndexSetKind index_set) {
  CheckSameShape(c1, c2);
  if (pi.rows() != c1.Q() || pi.cols() != c1.L()) {
    ThrowInvalid("connectivity matrix does not match the configuration");
  }
  const std::vector<int> ids = EntryIds(pi);
  const int L = pi.cols();
  std::int64_t count = 0;
  for (const Cell& cell : IndexSetCells(c1.n(), c1.m(), index_set)) {
    const int a = ids[c1.z(cell.i) * L + c1.w(cell.j)];
    const int b = ids[c2.z(cell.i) * L + c2.w(cell.j)];
    count += a != b;
  }
  return count;
}

BoundNumberCheck CheckBoundNumber(const Configuration& c_star,
                                  const Configuration& c,
                                  const ConnectivityMatrix& pi_star,
                                  const SymmetryGroup& sigma, double mu_min,
                                  IndexSetKind index_set) {
  const GroupCounts counts = CountGroups(c_star);
  for (int v : counts.rows) {
    if (v < c_star.n() * mu_min / 2.0) {
      ThrowInvalid("reference configuration is outside the good set");
    }
  }
  for (int v : counts.columns) {
    if (v < c_star.m() * mu_min / 2.0) {
      ThrowInvalid("reference configuration is outside the good set");
    }
  }
  const Distance dist = ConfigDistance(c, c_star, sigma);
  BoundNumberCheck out;
  out.r1 = dist.r1;
  out.r2 = dist.r2;
  out.lhs = DiffCount(c, c_star, pi_star, index_set);
  out.rhs = mu_min * mu_min / 8.0 *
            (static_cast<double>(c.m()) * dist.r1 +
             static_cast<double>(c.n()) * dist.r2);
  out.holds = static_cast<double>(out.lhs) >= out.rhs;
  return out;
}

}  // namespace blockpost
