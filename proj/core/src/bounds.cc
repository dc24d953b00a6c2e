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

#include "blockpost/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockpost/divergence.h"
#include "blockpost/error.h"

namespace blockpost {
namespace {

double LogRatioSpread(const std::vector<double>& p) {
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  if (*hi - *lo <= 1e-12) return 0.0;
  return std::log(*hi / *lo);
}

// Minimum inner-family KL over ordered pairs of distinct inner coordinates.
double KappaTildeMin(const ConnectivityMatrix& pi, const Family& inner) {
  double best = std::numeric_limits<double>::infinity();
  for (const Param& u : pi.entries()) {
    for (const Param& v : pi.entries()) {
      if (u[1] == v[1]) continue;
      best = std::min(best, KlDivergence(inner, Param{u[1]}, Param{v[1]}));
    }
  }
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace

std::string_view BoundRegimeName(BoundRegime regime) {
  switch (regime) {
    case BoundRegime::kDense:
      return "dense";
    case BoundRegime::kSparseBinary:
      return "sparse_binary";
    case BoundRegime::kSparseWeighted:
      return "sparse_weighted";
  }
  return "unknown";
}

double CMin(const ConnectivityMatrix& pi, double a) {
  double best = std::numeric_limits<double>::infinity();
  for (const Param& u : pi.entries()) {
    for (const Param& v : pi.entries()) {
      if (u[0] == v[0]) continue;
      const double d = u[0] - v[0];
      best = std::min(best, d * d / u[0]);
    }
  }
  if (!std::isfinite(best)) return 0.0;
  const double r = a / (1.0 - a);
  return 0.5 * r * r * best;
}

double SparseScalings::PsiLower(double x) const {
  if (!weighted) return xi * BrevePsiSparseBinary(x, a, mu_min);
  const double tilde = TildePsiStar(*inner, x / 2.0);
  const double breve = BrevePsiSparseWeighted(x / 2.0, a);
  return xi * mu_min * mu_min / 8.0 * std::min(tilde, breve);
}

SparseScalings ComputeSparseScalings(const ConnectivityMatrix& pi,
                                     const Family& family, double xi,
                                     double mu_min) {
  if (!(xi > 0.0 && xi <= 1.0)) ThrowInvalid("xi must lie in (0, 1]");
  if (pi.xi() != 1.0) ThrowInvalid("sparse scalings take the unscaled matrix");
  SparseScalings s;
  s.xi = xi;
  s.a = family.a();
  s.mu_min = mu_min;
  s.c_min = CMin(pi, family.a());
  switch (family.kind()) {
    case FamilyKind::kBernoulli:
      if (s.c_min <= 0.0) ThrowTheory("c_min undefined: all entries are identical");
      s.kappa_lower = xi * s.c_min;
      s.lipschitz = xi / family.a();
      break;
    case FamilyKind::kZeroInflated:
      s.weighted = true;
      s.inner = std::make_shared<const Family>(family.inner());
      s.kappa_tilde_min = KappaTildeMin(pi, family.inner());
      if (s.c_min <= 0.0 && s.kappa_tilde_min <= 0.0) {
        ThrowTheory("c_min and kappa~_min both vanish: all entries are identical");
      }
      s.kappa_lower = xi * (s.c_min + family.a() * s.kappa_tilde_min);
      s.lipschitz = xi * (1.0 / family.a() + LipschitzL0(family.inner()));
      break;
    default:
      ThrowInvalid("sparse scalings need a bernoulli or zero-inflated family");
  }
  return s;
}

double BoundReport::a_exponent() const {
  return regime == BoundRegime::kDense ? rate_constant() : xi * rate_constant();
}

double BoundReport::psi_star(double x) const {
  if (regime == BoundRegime::kDense) return (*psi)(x);
  return sparse->PsiLower(x);
}

double BoundReport::d_exponent() const { return psi_star(rate_constant()); }

double BoundReport::a_nm(int n, int m) const {
  const double e = a_exponent();
  if (sbm) return n * std::exp(-2.0 * n * e + K);
  return n * std::exp(-e * m + K) + m * std::exp(-e * n + K);
}

double BoundReport::b_nm(int n, int m) const {
  if (sbm) return n * std::exp(-2.0 * C * n - K);
  return n * std::exp(-C * m - K) + m * std::exp(-C * n - K);
}

double BoundReport::d_nm(int n, int m) const {
  const double e = d_exponent();
  if (sbm) return n * std::exp(-2.0 * e * n);
  return n * std::exp(-e * m) + m * std::exp(-e * n);
}

double BoundReport::eps_nm(int n, int m) const {
  const double d = d_nm(n, m);
  const double tail = tail_factor * static_cast<double>(sigma_size) * d * std::exp(d);
  if (sbm) return 2.0 * Q * std::exp(-n * alpha_min * alpha_min / 2.0) + tail;
  return 2.0 * Q * L * std::exp(-std::min(n, m) * mu_min * mu_min / 2.0) + tail;
}

double BoundReport::class_mass_lower(int n, int m, bool with_sigma) const {
  const double a = a_nm(n, m);
  const double factor = with_sigma ? static_cast<double>(sigma_size) : 1.0;
  return 1.0 - factor * a * std::exp(a);
}

BoundReport TheoremConstants(const ModelSpec& spec, double eta,
                             const BoundOptions& options) {
  if (!spec.IsIdentifiable()) {
    ThrowTheory("identifiability precondition fails: repeated rows or columns in pi");
  }
  const Family& family = spec.family();
  const ConnectivityMatrix& pi = spec.pi();
  BoundReport r;
  r.sbm = spec.is_sbm();
  r.Q = spec.Q();
  r.L = spec.L();
  r.mu_min = spec.mu_min();
  r.alpha_min = spec.alpha_min();
  r.xi = pi.xi();
  r.eta = eta;
  r.K = std::max(LogRatioSpread(spec.alpha()), LogRatioSpread(spec.beta()));
  r.sigma_size = DetectSymmetryGroup(pi, spec.variant(), options.symmetry).size();
  r.kappa_min = KappaMin(pi, family);
  r.kappa_max = KappaMax(family, r.xi);
  r.C = 2.0 * r.kappa_max;

  const bool sparse = r.xi != 1.0 || options.sparse_form;
  if (!sparse) {
    r.regime = BoundRegime::kDense;
    r.L0 = LipschitzL0(family);
    r.c = r.mu_min * r.mu_min * r.kappa_min / 16.0;
    RateOptions ro = options.rate;
    ro.xi = 1.0;
    r.psi = std::make_shared<const RateFunction>(
        DefaultRateFunction(family, r.mu_min, ro));
    r.rate_name = std::string(r.psi->name());
    r.tail_factor = r.psi->tail_factor();
  } else {
    auto s = std::make_shared<SparseScalings>(
        ComputeSparseScalings(pi.WithXi(1.0), family, r.xi, r.mu_min));
    r.regime = s->weighted ? BoundRegime::kSparseWeighted : BoundRegime::kSparseBinary;
    if (s->weighted) {
      r.L0 = 1.0 / family.a() + LipschitzL0(family.inner());
      r.c = r.mu_min * r.mu_min * (s->c_min + family.a() * s->kappa_tilde_min) / 16.0;
      r.rate_name = "sparse_weighted_composite";
      r.tail_factor = 4.0;
    } else {
      r.L0 = 1.0 / family.a();
      r.c = r.mu_min * r.mu_min * s->c_min / 16.0;
      r.rate_name = std::string(RateKindName(RateKind::kBreveSparseBinary));
      r.tail_factor = 2.0;
    }
    r.sparse = std::move(s);
  }

  if (!(eta >= 0.0) || !(eta < r.c / (2.0 * r.L0))) {
    ThrowTheory("eta must satisfy 0 <= eta < c/(2 L0) = " +
                std::to_string(r.c / (2.0 * r.L0)));
  }
  if (r.regime == BoundRegime::kDense && r.c > r.C / 2.0) {
    ThrowTheory("constant ordering c <= C/2 fails");
  }
  return r;
}

HelperCheck HelperInequality(double u, double v, double n, double m) {
  HelperCheck h;
  h.lhs = std::expm1(n * std::log1p(u) + m * std::log1p(v));
  const double s = n * u + m * v;
  h.rhs = s * std::exp(s);
  h.holds = h.lhs <= h.rhs * (1.0 + 1e-12);
  return h;
}

}  // namespace blockpost
