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

#include "blockpost/rate.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "blockpost/divergence.h"
#include "blockpost/error.h"

namespace blockpost {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kThetaGrid = 64;

double Softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}
double Sigmoid(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

// One-parameter exponential family in natural coordinates: T(x) sufficient
// statistic, A log-partition, A' its mean.
class NaturalFamily {
 public:
  NaturalFamily(const Family& f, double xi) : f_(f) {
    switch (f.kind()) {
      case FamilyKind::kBernoulli:
      case FamilyKind::kBinomial:
      case FamilyKind::kPoisson:
      case FamilyKind::kGaussLocation:
      case FamilyKind::kGaussScale:
      case FamilyKind::kZeroTruncatedPoisson:
        break;
      default:
        ThrowInvalid(std::string(f.name()) + " is not a one-parameter exponential family");
    }
    Interval box = f.bounds();
    if (xi != 1.0) {
      if (f.kind() != FamilyKind::kBernoulli) {
        ThrowInvalid("xi-scaled boxes are only defined for bernoulli");
      }
      box = {xi * box.lo, xi * box.hi};
    }
    lo_ = Theta(box.lo);
    hi_ = Theta(box.hi);
  }

  double Theta(double p) const {
    switch (f_.kind()) {
      case FamilyKind::kBernoulli:
      case FamilyKind::kBinomial:
        return std::log(p) - std::log1p(-p);
      case FamilyKind::kPoisson:
      case FamilyKind::kZeroTruncatedPoisson:
        return std::log(p);
      case FamilyKind::kGaussLocation:
        return p / f_.variance();
      case FamilyKind::kGaussScale:
        return -0.5 / p;
      default:
        return 0.0;
    }
  }

  double A(double t) const {
    switch (f_.kind()) {
      case FamilyKind::kBernoulli:
        return Softplus(t);
      case FamilyKind::kBinomial:
        return f_.trials() * Softplus(t);
      case FamilyKind::kPoisson:
        return std::exp(t);
      case FamilyKind::kZeroTruncatedPoisson: {
        const double g = std::exp(t);
        return g + std::log(-std::expm1(-g));
      }
      case FamilyKind::kGaussLocation:
        return 0.5 * f_.variance() * t * t;
      case FamilyKind::kGaussScale:
        return t < 0.0 ? -0.5 * std::log(-2.0 * t) : kInf;
      default:
        return 0.0;
    }
  }

  double Mean(double t) const {
    switch (f_.kind()) {
      case FamilyKind::kBernoulli:
        return Sigmoid(t);
      case FamilyKind::kBinomial:
        return f_.trials() * Sigmoid(t);
      case FamilyKind::kPoisson:
        return std::exp(t);
      case FamilyKind::kZeroTruncatedPoisson: {
        const double g = std::exp(t);
        return g / -std::expm1(-g);
      }
      case FamilyKind::kGaussLocation:
        return f_.variance() * t;
      case FamilyKind::kGaussScale:
        return -0.5 / t;
      default:
        return 0.0;
    }
  }

  // Upper end of the natural parameter space.
  double DomainHi() const {
    return f_.kind() == FamilyKind::kGaussScale ? 0.0 : kInf;
  }

  // A(t + s) - A(t) - s A'(t): centred log-MGF of s (T - E T) under t.
  double K(double t, double s) const {
    if (t + s >= DomainHi()) return kInf;
    return A(t + s) - A(t) - s * Mean(t);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }

 private:
  const Family& f_;
  double lo_;
  double hi_;
};

// max over t in [lo, hi] of K(t, s): coarse grid, then golden refinement.
double MaxOverTruth(const NaturalFamily& nf, double s) {
  const double lo = nf.lo();
  const double hi = nf.hi();
  if (hi <= lo) return nf.K(lo, s);
  double best = -kInf;
  int best_k = 0;
  for (int k = 0; k <= kThetaGrid; ++k) {
    const double t = lo + (hi - lo) * k / kThetaGrid;
    const double v = nf.K(t, s);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  if (!std::isfinite(best)) return best;
  const double step = (hi - lo) / kThetaGrid;
  const double a = std::max(lo, lo + (best_k - 1) * step);
  const double b = std::min(hi, lo + (best_k + 1) * step);
  const GoldenResult g =
      GoldenMaximize([&](double t) { return nf.K(t, s); }, a, b, 1e-12);
  return std::max(best, g.value);
}

// Multinomial: K(lambda) = log sum_k p''_k exp(lambda (l_k - lbar)).
double MultinomialK(const std::vector<double>& ell, const std::vector<double>& pt,
                    double lambda) {
  double mean = 0.0;
  for (std::size_t k = 0; k < ell.size(); ++k) mean += pt[k] * ell[k];
  double mx = -kInf;
  for (double l : ell) mx = std::max(mx, lambda * (l - mean));
  double s = 0.0;
  for (std::size_t k = 0; k < ell.size(); ++k) {
    s += pt[k] * std::exp(lambda * (ell[k] - mean) - mx);
  }
  return mx + std::log(s);
}

// Maximises the concave map p'' -> K over {p'' >= a, sum = 1} by pairwise
// exchange sweeps.
double MaxMultinomialTruth(const std::vector<double>& ell, double a,
                           double lambda) {
  const int levels = static_cast<int>(ell.size());
  std::vector<double> pt(levels, 1.0 / levels);
  double current = MultinomialK(ell, pt, lambda);
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double before = current;
    for (int u = 0; u < levels; ++u) {
      for (int v = u + 1; v < levels; ++v) {
        const double total = pt[u] + pt[v];
        const double lo = a;
        const double hi = total - a;
        if (hi <= lo) continue;
        auto f = [&](double x) {
          std::vector<double> q = pt;
          q[u] = x;
          q[v] = total - x;
          return MultinomialK(ell, q, lambda);
        };
        const GoldenResult g = GoldenMaximize(f, lo, hi, 1e-13);
        if (g.value > current) {
          pt[u] = g.arg;
          pt[v] = total - g.arg;
          current = g.value;
        }
      }
    }
    if (current - before <= 1e-15 * std::max(1.0, std::abs(current))) break;
  }
  return current;
}

std::vector<std::pair<Param, Param>> MultinomialPairs(const Family& f) {
  const std::vector<Param> vertices = MultinomialVertices(f.levels(), f.a());
  std::vector<std::pair<Param, Param>> pairs;
  for (const Param& p : vertices) {
    for (const Param& q : vertices) {
      if (!(p == q)) pairs.emplace_back(p, q);
    }
  }
  // Deterministic interior pairs: vertices mixed with the centroid.
  const int levels = f.levels();
  const Param centroid(std::vector<double>(levels, 1.0 / levels));
  for (double w : {0.25, 0.5, 0.75}) {
    for (const Param& p : vertices) {
      std::vector<double> mixed(levels);
      for (int k = 0; k < levels; ++k) mixed[k] = w * p[k] + (1 - w) * centroid[k];
      pairs.emplace_back(Param(mixed), centroid);
      pairs.emplace_back(centroid, Param(mixed));
      for (const Param& q : vertices) {
        if (p == q) continue;
        pairs.emplace_back(Param(mixed), q);
        pairs.emplace_back(q, Param(mixed));
      }
    }
  }
  return pairs;
}

double MultinomialPsiMax(const Family& f, double lambda) {
  double best = 0.0;
  for (const auto& [p, q] : MultinomialPairs(f)) {
    std::vector<double> ell(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) ell[k] = std::log(p[k] / q[k]);
    best = std::max(best, MaxMultinomialTruth(ell, f.a(), lambda));
  }
  return best;
}

// sup over lambda in (0, domain) of objective(lambda), objective concave
// with objective(0) = 0.
double ConcaveSup(const std::function<double(double)>& objective,
                  double domain) {
  double hi;
  if (std::isfinite(domain)) {
    hi = domain * (1.0 - 1e-12);
  } else {
    hi = 1.0;
    while (hi < 1e8 && objective(2.0 * hi) > objective(hi)) hi *= 2.0;
    hi *= 2.0;
  }
  const GoldenResult g = GoldenMaximize(objective, 0.0, hi, 1e-12);
  return std::max(0.0, g.value);
}

double Ell(double a) { return std::log1p(-a) - std::log(a); }

}  // namespace

GoldenResult GoldenMaximize(const std::function<double(double)>& f, double lo,
                            double hi, double tol, int max_iter) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  GoldenResult best{c, fc};
  if (fd > best.value) best = {d, fd};
  for (double x : {lo, hi}) {
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

double CentredLogMgf(const Family& family, const Param& p, const Param& pp,
                     const Param& pt, double lambda) {
  switch (family.kind()) {
    case FamilyKind::kMultinomial: {
      std::vector<double> ell(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) ell[k] = std::log(p[k] / pp[k]);
      return MultinomialK(ell, pt.coords(), lambda);
    }
    case FamilyKind::kZeroInflated: {
      // Two-point mixture: zero with mass 1 - pi'', else the inner ratio.
      const double mean = CrossTerm(family, p, pp, pt);
      const double zero_value = std::log1p(-p[0]) - std::log1p(-pp[0]);
      const double nonzero_shift = std::log(p[0] / pp[0]);
      const Family& inner = family.inner();
      const Param ip{p[1]}, ipp{pp[1]}, ipt{pt[1]};
      const double inner_mean = CrossTerm(inner, ip, ipp, ipt);
      const double inner_k = CentredLogMgf(inner, ip, ipp, ipt, lambda);
      const double t0 = std::log1p(-pt[0]) + lambda * (zero_value - mean);
      const double t1 = std::log(pt[0]) + inner_k +
                        lambda * (nonzero_shift + inner_mean - mean);
      const double mx = std::max(t0, t1);
      return mx + std::log(std::exp(t0 - mx) + std::exp(t1 - mx));
    }
    default: {
      const NaturalFamily nf(family, 1.0);
      const double s = lambda * (nf.Theta(p[0]) - nf.Theta(pp[0]));
      return nf.K(nf.Theta(pt[0]), s);
    }
  }
}

double PsiMax(const Family& family, double lambda, double xi) {
  if (family.kind() == FamilyKind::kMultinomial) {
    return MultinomialPsiMax(family, lambda);
  }
  const NaturalFamily nf(family, xi);
  const double w = nf.width();
  return std::max(MaxOverTruth(nf, lambda * w), MaxOverTruth(nf, -lambda * w));
}

double PsiMaxDomain(const Family& family, double xi) {
  if (family.kind() != FamilyKind::kGaussScale) return kInf;
  const NaturalFamily nf(family, xi);
  if (nf.width() <= 0.0) return kInf;
  return -nf.hi() / nf.width();
}

double ExactChernoffMax(const Family& family, double x, double xi) {
  if (x <= 0.0) return 0.0;
  return ConcaveSup(
      [&](double lambda) { return lambda * x - PsiMax(family, lambda, xi); },
      PsiMaxDomain(family, xi));
}

double ExactChernoffRate(const Family& family, double mu_min, double x,
                         double xi) {
  const double scale = mu_min * mu_min / 8.0;
  if (family.kind() == FamilyKind::kZeroInflated) {
    // Exact dual of each part of the split deviation, each at x / 2.
    const double inner = ExactChernoffMax(family.inner(), x / 2.0);
    const double bin = ExactChernoffMax(Family::Bernoulli(family.a()), x / 2.0, xi);
    return scale * std::min(inner, bin);
  }
  return scale * ExactChernoffMax(family, x, xi);
}

double TildePsiStar(const Family& inner, double x) {
  if (x <= 0.0) return 0.0;
  return ConcaveSup(
      [&](double lambda) {
        return lambda * x - std::exp(PsiMax(inner, lambda)) + 1.0;
      },
      PsiMaxDomain(inner));
}

std::string_view RateKindName(RateKind kind) {
  switch (kind) {
    case RateKind::kBinaryHoeffding:
      return "binary_hoeffding";
    case RateKind::kBinaryBernstein:
      return "binary_bernstein";
    case RateKind::kBreveDense:
      return "breve_psi_dense";
    case RateKind::kBreveSparseBinary:
      return "breve_psi_sparse_binary";
    case RateKind::kBreveSparseWeighted:
      return "breve_psi_sparse_weighted";
    case RateKind::kBinomial:
      return "binomial_hoeffding";
    case RateKind::kMultinomial:
      return "multinomial_hoeffding";
    case RateKind::kPoisson:
      return "poisson_bennett";
    case RateKind::kGaussLocation:
      return "gauss_location";
    case RateKind::kGaussScale:
      return "gauss_scale_displayed";
    case RateKind::kGaussScaleExactDual:
      return "gauss_scale_exact_dual";
    case RateKind::kZeroInflated:
      return "zero_inflated_composite";
  }
  return "unknown";
}

RateFunction::RateFunction(RateKind kind, RateParams params)
    : kind_(kind), params_(std::move(params)) {
  if (!(params_.mu_min > 0.0 && params_.mu_min <= 1.0)) {
    ThrowInvalid("rate function: mu_min must lie in (0, 1]");
  }
  switch (kind_) {
    case RateKind::kBinaryHoeffding:
    case RateKind::kBinaryBernstein:
    case RateKind::kBreveDense:
    case RateKind::kBreveSparseBinary:
    case RateKind::kBreveSparseWeighted:
    case RateKind::kBinomial:
    case RateKind::kMultinomial:
      if (!(params_.a > 0.0 && params_.a < 0.5)) {
        ThrowInvalid("rate function: a must lie in (0, 1/2)");
      }
      break;
    case RateKind::kPoisson:
    case RateKind::kGaussScale:
    case RateKind::kGaussScaleExactDual:
      if (!(params_.pi_min > 0.0 && params_.pi_max > params_.pi_min)) {
        ThrowInvalid("rate function: need 0 < pi_min < pi_max");
      }
      break;
    case RateKind::kGaussLocation:
      if (!(params_.pi_max > params_.pi_min) || !(params_.sigma2 > 0.0)) {
        ThrowInvalid("rate function: need pi_min < pi_max and sigma2 > 0");
      }
      break;
    case RateKind::kZeroInflated:
      if (!params_.inner || !(params_.a > 0.0 && params_.a < 0.5)) {
        ThrowInvalid("rate function: zero-inflated needs a and an inner family");
      }
      break;
  }
}

double RateFunction::operator()(double x) const {
  if (!(x > 0.0)) return 0.0;
  const RateParams& r = params_;
  const double mu2 = r.mu_min * r.mu_min;
  switch (kind_) {
    case RateKind::kBinaryHoeffding: {
      const double l = Ell(r.a);
      return x * x * mu2 / (16.0 * l * l);
    }
    case RateKind::kBinaryBernstein: {
      const double l = Ell(r.a);
      return x * x * mu2 / (64.0 * r.xi * l * l + 32.0 * x * l / 3.0);
    }
    case RateKind::kBreveDense:
      return BrevePsiDense(x, r.a, r.mu_min);
    case RateKind::kBreveSparseBinary:
      return BrevePsiSparseBinary(x, r.a, r.mu_min);
    case RateKind::kBreveSparseWeighted:
      return BrevePsiSparseWeighted(x, r.a);
    case RateKind::kBinomial: {
      const double l = Ell(r.a);
      const double p = r.count;
      return x * x * mu2 / (16.0 * p * p * l * l);
    }
    case RateKind::kMultinomial: {
      const double l = Ell(r.a);
      return x * x * mu2 / (8.0 * r.count * l * l);
    }
    case RateKind::kPoisson: {
      const double u = x / (r.pi_max * std::log(r.pi_max / r.pi_min));
      const double h = (1.0 + u) * std::log1p(u) - u;
      return mu2 * r.pi_max * h / 8.0;
    }
    case RateKind::kGaussLocation: {
      const double w = r.pi_max - r.pi_min;
      return mu2 * r.sigma2 * x * x / (16.0 * w * w);
    }
    case RateKind::kGaussScale: {
      const double w = r.pi_max - r.pi_min;
      return mu2 * r.sigma2 * x / (8.0 * w) +
             mu2 / 16.0 * std::log1p(2.0 * r.pi_min * x / w);
    }
    case RateKind::kGaussScaleExactDual: {
      const double y = 2.0 * r.pi_min * x / (r.pi_max - r.pi_min);
      return mu2 / 16.0 * (y - std::log1p(y));
    }
    case RateKind::kZeroInflated: {
      const double inner = mu2 * ExactChernoffMax(*r.inner, x / 2.0) / 8.0;
      const double l = Ell(r.a);
      const double bin = (x / 2.0) * (x / 2.0) * mu2 / (16.0 * l * l);
      return std::min(inner, bin);
    }
  }
  return 0.0;
}

RateFunction DefaultRateFunction(const Family& family, double mu_min,
                                 const RateOptions& options) {
  RateParams p;
  p.mu_min = mu_min;
  switch (family.kind()) {
    case FamilyKind::kBernoulli:
      p.a = family.a();
      p.xi = options.xi;
      return RateFunction(options.bernstein ? RateKind::kBinaryBernstein
                                            : RateKind::kBinaryHoeffding,
                          p);
    case FamilyKind::kBinomial:
      p.a = family.a();
      p.count = family.trials();
      return RateFunction(RateKind::kBinomial, p);
    case FamilyKind::kMultinomial:
      p.a = family.a();
      p.count = family.levels();
      return RateFunction(RateKind::kMultinomial, p);
    case FamilyKind::kPoisson:
      p.pi_min = family.bounds().lo;
      p.pi_max = family.bounds().hi;
      return RateFunction(RateKind::kPoisson, p);
    case FamilyKind::kGaussLocation:
      p.pi_min = family.bounds().lo;
      p.pi_max = family.bounds().hi;
      p.sigma2 = family.variance();
      return RateFunction(RateKind::kGaussLocation, p);
    case FamilyKind::kGaussScale:
      p.pi_min = family.bounds().lo;
      p.pi_max = family.bounds().hi;
      p.sigma2 = options.gauss_scale_sigma2.value_or(p.pi_min);
      return RateFunction(options.gauss_scale_exact_dual
                              ? RateKind::kGaussScaleExactDual
                              : RateKind::kGaussScale,
                          p);
    case FamilyKind::kZeroInflated:
      p.a = family.a();
      p.inner = std::make_shared<const Family>(family.inner());
      return RateFunction(RateKind::kZeroInflated, p);
    case FamilyKind::kZeroTruncatedPoisson:
      break;
  }
  ThrowInvalid("no closed-form rate function for " + std::string(family.name()));
}

double BrevePsiDense(double x, double a, double mu_min) {
  if (!(x > 0.0)) return 0.0;
  const double l = Ell(a);
  return x * x * mu_min * mu_min / (64.0 * l * l + 32.0 * x * l / 3.0);
}

double BrevePsiSparseBinary(double x, double a, double mu_min) {
  if (!(x > 0.0)) return 0.0;
  const double l = Ell(a);
  return x * x * mu_min * mu_min / (64.0 * a * l * l + 32.0 * x * l / 3.0);
}

double BrevePsiSparseWeighted(double x, double a) {
  if (!(x > 0.0)) return 0.0;
  const double l = Ell(a);
  return x * x / (8.0 * a * l * l + 4.0 * x * l / 3.0);
}

}  // namespace blockpost
