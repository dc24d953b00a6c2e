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

#include "blockpost/divergence.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockpost/error.h"

namespace blockpost {
namespace {

double XLogRatio(double x, double p, double q) {
  return x == 0.0 ? 0.0 : x * std::log(p / q);
}

double ZtpMean(double g) { return g / -std::expm1(-g); }

// log(1 - e^{-g}).
double Log1mExpNeg(double g) {
  return g < std::log(2.0) ? std::log(-std::expm1(-g))
                           : std::log1p(-std::exp(-g));
}

double MaxCornerKl(const Family& family, Interval box) {
  const Param lo{box.lo};
  const Param hi{box.hi};
  return std::max(KlDivergence(family, lo, hi), KlDivergence(family, hi, lo));
}

}  // namespace

double CrossTerm(const Family& family, const Param& p, const Param& pp,
                 const Param& pt) {
  switch (family.kind()) {
    case FamilyKind::kBernoulli:
      return pt[0] * std::log(p[0] / pp[0]) +
             (1.0 - pt[0]) * (std::log1p(-p[0]) - std::log1p(-pp[0]));
    case FamilyKind::kBinomial:
      return family.trials() *
             (pt[0] * std::log(p[0] / pp[0]) +
              (1.0 - pt[0]) * (std::log1p(-p[0]) - std::log1p(-pp[0])));
    case FamilyKind::kMultinomial: {
      double s = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) s += XLogRatio(pt[k], p[k], pp[k]);
      return s;
    }
    case FamilyKind::kPoisson:
      return pt[0] * std::log(p[0] / pp[0]) - (p[0] - pp[0]);
    case FamilyKind::kZeroTruncatedPoisson:
      return ZtpMean(pt[0]) * std::log(p[0] / pp[0]) - (p[0] - pp[0]) -
             (Log1mExpNeg(p[0]) - Log1mExpNeg(pp[0]));
    case FamilyKind::kGaussLocation: {
      const double a = pt[0] - pp[0];
      const double b = pt[0] - p[0];
      return (a * a - b * b) / (2.0 * family.variance());
    }
    case FamilyKind::kGaussScale:
      return -0.5 * std::log(p[0] / pp[0]) - pt[0] / (2.0 * p[0]) +
             pt[0] / (2.0 * pp[0]);
    case FamilyKind::kZeroInflated: {
      const double dirac =
          (1.0 - pt[0]) * (std::log1p(-p[0]) - std::log1p(-pp[0]));
      const double inner =
          CrossTerm(family.inner(), Param{p[1]}, Param{pp[1]}, Param{pt[1]});
      return dirac + pt[0] * std::log(p[0] / pp[0]) + pt[0] * inner;
    }
  }
  return 0.0;
}

double KlDivergence(const Family& family, const Param& p, const Param& pp) {
  if (p == pp) return 0.0;
  return CrossTerm(family, p, pp, p);
}

double KappaMin(const ConnectivityMatrix& pi, const Family& family) {
  const ConnectivityMatrix eff = pi.Effective(family);
  double best = std::numeric_limits<double>::infinity();
  const auto& e = eff.entries();
  for (std::size_t u = 0; u < e.size(); ++u) {
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (e[u] == e[v]) continue;
      best = std::min(best, KlDivergence(family, e[u], e[v]));
    }
  }
  if (!std::isfinite(best)) {
    ThrowTheory("kappa_min undefined: all connectivity entries are identical");
  }
  return best;
}

std::vector<Param> MultinomialVertices(int levels, double a) {
  // A vertex has levels-1 coordinates at a bound; the free one is implied.
  std::vector<Param> out;
  const int others = levels - 1;
  for (int free = 0; free < levels; ++free) {
    for (int mask = 0; mask < (1 << others); ++mask) {
      std::vector<double> v(levels);
      double sum = 0.0;
      for (int k = 0, bit = 0; k < levels; ++k) {
        if (k == free) continue;
        v[k] = (mask >> bit++) & 1 ? 1.0 - a : a;
        sum += v[k];
      }
      v[free] = 1.0 - sum;
      if (v[free] < a - 1e-15 || v[free] > 1.0 - a + 1e-15) continue;
      v[free] = std::clamp(v[free], a, 1.0 - a);
      Param p(std::move(v));
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Param& x, const Param& y) { return x.coords() < y.coords(); });
  return out;
}

double KappaMax(const Family& family, double xi) {
  switch (family.kind()) {
    case FamilyKind::kBernoulli: {
      const Interval box{xi * family.bounds().lo, xi * family.bounds().hi};
      return MaxCornerKl(family, box);
    }
    case FamilyKind::kMultinomial: {
      const auto vertices = MultinomialVertices(family.levels(), family.a());
      double best = 0.0;
      for (const Param& p : vertices) {
        for (const Param& q : vertices) {
          best = std::max(best, KlDivergence(family, p, q));
        }
      }
      return best;
    }
    case FamilyKind::kZeroInflated: {
      // D = D_bern(pi || pi') + pi * D~(gamma || gamma'); for fixed (pi, pi')
      // the inner part is maximal at a gamma corner, and the remainder is
      // convex in each of pi, pi'.
      const double inner_max = MaxCornerKl(family.inner(), family.inner().bounds());
      const double lo = xi * family.bounds().lo;
      const double hi = xi * family.bounds().hi;
      const Family bern = Family::Bernoulli(family.a());
      double best = 0.0;
      for (double p : {lo, hi}) {
        for (double q : {lo, hi}) {
          const double d = p == q ? 0.0 : KlDivergence(bern, Param{p}, Param{q});
          best = std::max(best, d + p * inner_max);
        }
      }
      return best;
    }
    default:
      if (xi != 1.0) ThrowInvalid(std::string(family.name()) + " has no sparsity part");
      return MaxCornerKl(family, family.bounds());
  }
}

double LipschitzL0(const Family& family) {
  const Interval box = family.bounds();
  switch (family.kind()) {
    case FamilyKind::kBernoulli:
    case FamilyKind::kMultinomial:
      return 1.0 / family.a();
    case FamilyKind::kBinomial:
      return family.trials() / family.a();
    case FamilyKind::kPoisson:
      return box.hi / box.lo - 1.0;
    case FamilyKind::kGaussLocation:
      return box.width() / family.variance();
    case FamilyKind::kGaussScale:
      return box.width() / (2.0 * box.lo * box.lo);
    case FamilyKind::kZeroTruncatedPoisson:
      return (ZtpMean(box.hi) - ZtpMean(box.lo)) / box.lo;
    case FamilyKind::kZeroInflated:
      return 1.0 / family.a() + LipschitzL0(family.inner());
  }
  return 0.0;
}

}  // namespace blockpost
