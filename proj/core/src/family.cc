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

#include "blockpost/family.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "blockpost/error.h"

namespace blockpost {
namespace {

constexpr double kSimplexTol = 1e-12;

double LogTwoPi() { return std::log(2.0 * std::numbers::pi); }

bool IsNonnegativeInteger(double x) {
  return x >= 0.0 && std::floor(x) == x && std::isfinite(x);
}

double LogChoose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log(1 - exp(-g)) for g > 0, accurate for small g.
double Log1mExpNeg(double g) {
  return g < std::numbers::ln2 ? std::log(-std::expm1(-g))
                               : std::log1p(-std::exp(-g));
}

std::string Fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void RequireBox(double lo, double hi, bool positive, std::string_view what) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi ||
      (positive && lo <= 0.0)) {
    ThrowInvalid(std::string(what) + ": invalid parameter bounds [" + Fmt(lo) +
                 ", " + Fmt(hi) + "]");
  }
}

void RequireA(double a, double upper, std::string_view what) {
  if (!(a > 0.0 && a < upper)) {
    ThrowInvalid(std::string(what) + ": bound a=" + Fmt(a) +
                 " must lie in (0, " + Fmt(upper) + ")");
  }
}

}  // namespace

double SupDistance(const Param& p, const Param& q) {
  if (p.size() != q.size()) ThrowInvalid("parameter dimension mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    d = std::max(d, std::abs(p[k] - q[k]));
  }
  return d;
}

std::string_view FamilyKindName(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kBernoulli:
      return "bernoulli";
    case FamilyKind::kBinomial:
      return "binomial";
    case FamilyKind::kMultinomial:
      return "multinomial";
    case FamilyKind::kPoisson:
      return "poisson";
    case FamilyKind::kGaussLocation:
      return "gauss_location";
    case FamilyKind::kGaussScale:
      return "gauss_scale";
    case FamilyKind::kZeroTruncatedPoisson:
      return "zero_truncated_poisson";
    case FamilyKind::kZeroInflated:
      return "zero_inflated";
  }
  return "unknown";
}

Family Family::Bernoulli(double a) {
  RequireA(a, 0.5, "bernoulli");
  return Family(FamilyKind::kBernoulli, 1, a, {a, 1.0 - a}, 0.0, nullptr);
}

Family Family::Binomial(int trials, double a) {
  if (trials < 1) ThrowInvalid("binomial: trials must be positive");
  RequireA(a, 0.5, "binomial");
  return Family(FamilyKind::kBinomial, trials, a, {a, 1.0 - a}, 0.0, nullptr);
}

Family Family::Multinomial(int levels, double a) {
  if (levels < 2) ThrowInvalid("multinomial: at least two levels required");
  RequireA(a, 1.0 / levels, "multinomial");
  return Family(FamilyKind::kMultinomial, levels, a, {a, 1.0 - a}, 0.0,
                nullptr);
}

Family Family::Poisson(double min, double max) {
  RequireBox(min, max, true, "poisson");
  return Family(FamilyKind::kPoisson, 0, 0.0, {min, max}, 0.0, nullptr);
}

Family Family::GaussLocation(double variance, double min, double max) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    ThrowInvalid("gauss_location: variance must be positive");
  }
  RequireBox(min, max, false, "gauss_location");
  return Family(FamilyKind::kGaussLocation, 0, 0.0, {min, max}, variance,
                nullptr);
}

Family Family::GaussScale(double mean, double min, double max) {
  if (!std::isfinite(mean)) ThrowInvalid("gauss_scale: mean must be finite");
  RequireBox(min, max, true, "gauss_scale");
  return Family(FamilyKind::kGaussScale, 0, 0.0, {min, max}, mean, nullptr);
}

Family Family::ZeroTruncatedPoisson(double min, double max) {
  RequireBox(min, max, true, "zero_truncated_poisson");
  return Family(FamilyKind::kZeroTruncatedPoisson, 0, 0.0, {min, max}, 0.0,
                nullptr);
}

Family Family::ZeroInflated(double a, const Family& inner) {
  RequireA(a, 0.5, "zero_inflated");
  switch (inner.kind()) {
    case FamilyKind::kZeroTruncatedPoisson:
    case FamilyKind::kGaussLocation:
    case FamilyKind::kGaussScale:
      break;
    default:
      ThrowInvalid(
          "zero_inflated: inner family must have a continuous c.d.f. at zero "
          "(gauss_location, gauss_scale) or be zero_truncated_poisson; got " +
          std::string(inner.name()));
  }
  return Family(FamilyKind::kZeroInflated, 0, a, {a, 1.0 - a}, 0.0,
                std::make_shared<const Family>(inner));
}

const Family& Family::inner() const {
  if (!inner_) ThrowInvalid(std::string(name()) + " has no inner family");
  return *inner_;
}

int Family::param_dim() const {
  switch (kind_) {
    case FamilyKind::kMultinomial:
      return count_;
    case FamilyKind::kZeroInflated:
      return 2;
    default:
      return 1;
  }
}

bool Family::is_discrete() const {
  switch (kind_) {
    case FamilyKind::kGaussLocation:
    case FamilyKind::kGaussScale:
      return false;
    case FamilyKind::kZeroInflated:
      return inner_->is_discrete();
    default:
      return true;
  }
}

bool Family::supports_sparsity() const {
  return kind_ == FamilyKind::kBernoulli || kind_ == FamilyKind::kZeroInflated;
}

bool Family::InBounds(const Param& p, double tol) const {
  if (static_cast<int>(p.size()) != param_dim()) return false;
  const auto in_box = [tol](Interval box, double x) {
    return std::isfinite(x) && x >= box.lo - tol && x <= box.hi + tol;
  };
  switch (kind_) {
    case FamilyKind::kMultinomial: {
      double sum = 0.0;
      for (double v : p.coords()) {
        if (!in_box(box_, v)) return false;
        sum += v;
      }
      return std::abs(sum - 1.0) <= kSimplexTol + tol;
    }
    case FamilyKind::kZeroInflated:
      return in_box(box_, p[0]) && in_box(inner_->box_, p[1]);
    default:
      return in_box(box_, p[0]);
  }
}

void Family::CheckBounds(const Param& p) const {
  if (InBounds(p)) return;
  std::ostringstream os;
  os.precision(17);
  os << name() << ": parameter (";
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ") outside the parameter set";
  ThrowInvalid(os.str());
}

bool Family::IsValidParam(const Param& p) const {
  if (static_cast<int>(p.size()) != param_dim()) return false;
  switch (kind_) {
    case FamilyKind::kBernoulli:
    case FamilyKind::kBinomial:
      return p[0] > 0.0 && p[0] < 1.0;
    case FamilyKind::kMultinomial: {
      double sum = 0.0;
      for (double v : p.coords()) {
        if (!(v > 0.0 && v < 1.0)) return false;
        sum += v;
      }
      return std::abs(sum - 1.0) <= 1e-9;
    }
    case FamilyKind::kPoisson:
    case FamilyKind::kGaussScale:
    case FamilyKind::kZeroTruncatedPoisson:
      return p[0] > 0.0 && std::isfinite(p[0]);
    case FamilyKind::kGaussLocation:
      return std::isfinite(p[0]);
    case FamilyKind::kZeroInflated:
      return p[0] > 0.0 && p[0] < 1.0 && inner_->IsValidParam(Param{p[1]});
  }
  return false;
}

bool Family::InSupport(double x) const {
  if (!std::isfinite(x)) return false;
  switch (kind_) {
    case FamilyKind::kBernoulli:
      return x == 0.0 || x == 1.0;
    case FamilyKind::kBinomial:
      return IsNonnegativeInteger(x) && x <= count_;
    case FamilyKind::kMultinomial:
      return IsNonnegativeInteger(x) && x >= 1.0 && x <= count_;
    case FamilyKind::kPoisson:
      return IsNonnegativeInteger(x);
    case FamilyKind::kZeroTruncatedPoisson:
      return IsNonnegativeInteger(x) && x >= 1.0;
    case FamilyKind::kGaussLocation:
    case FamilyKind::kGaussScale:
      return true;
    case FamilyKind::kZeroInflated:
      return x == 0.0 || inner_->InSupport(x);
  }
  return false;
}

double Family::LogDensity(double x, const Param& p) const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!InSupport(x)) return kNegInf;
  switch (kind_) {
    case FamilyKind::kBernoulli:
      return x == 1.0 ? std::log(p[0]) : std::log1p(-p[0]);
    case FamilyKind::kBinomial: {
      const int k = static_cast<int>(x);
      return LogChoose(count_, k) + x * std::log(p[0]) +
             (count_ - x) * std::log1p(-p[0]);
    }
    case FamilyKind::kMultinomial:
      return std::log(p[static_cast<std::size_t>(x) - 1]);
    case FamilyKind::kPoisson:
      return x * std::log(p[0]) - p[0] - std::lgamma(x + 1.0);
    case FamilyKind::kZeroTruncatedPoisson:
      return x * std::log(p[0]) - p[0] - std::lgamma(x + 1.0) -
             Log1mExpNeg(p[0]);
    case FamilyKind::kGaussLocation: {
      const double d = x - p[0];
      return -0.5 * (LogTwoPi() + std::log(fixed_)) - d * d / (2.0 * fixed_);
    }
    case FamilyKind::kGaussScale: {
      const double d = x - fixed_;
      return -0.5 * (LogTwoPi() + std::log(p[0])) - d * d / (2.0 * p[0]);
    }
    case FamilyKind::kZeroInflated:
      // Dominating measure: Dirac at zero plus the inner family's measure.
      if (x == 0.0) return std::log1p(-p[0]);
      return std::log(p[0]) + inner_->LogDensity(x, Param{p[1]});
  }
  return kNegInf;
}

double Family::Sample(const Param& p, CounterRng& rng) const {
  switch (kind_) {
    case FamilyKind::kBernoulli:
      return rng.Bernoulli(p[0]) ? 1.0 : 0.0;
    case FamilyKind::kBinomial: {
      int successes = 0;
      for (int t = 0; t < count_; ++t) successes += rng.Bernoulli(p[0]);
      return successes;
    }
    case FamilyKind::kMultinomial:
      return rng.Categorical(p.coords()) + 1.0;
    case FamilyKind::kPoisson: {
      std::poisson_distribution<long long> dist(p[0]);
      return static_cast<double>(dist(rng));
    }
    case FamilyKind::kZeroTruncatedPoisson: {
      std::poisson_distribution<long long> dist(p[0]);
      while (true) {
        const long long k = dist(rng);
        if (k > 0) return static_cast<double>(k);
      }
    }
    case FamilyKind::kGaussLocation: {
      std::normal_distribution<double> dist(p[0], std::sqrt(fixed_));
      return dist(rng);
    }
    case FamilyKind::kGaussScale: {
      std::normal_distribution<double> dist(fixed_, std::sqrt(p[0]));
      return dist(rng);
    }
    case FamilyKind::kZeroInflated: {
      if (!rng.Bernoulli(p[0])) return 0.0;
      double x = inner_->Sample(Param{p[1]}, rng);
      // A continuous inner draw hits exactly zero with probability zero;
      // redraw so the Dirac component keeps its nominal mass.
      while (x == 0.0) x = inner_->Sample(Param{p[1]}, rng);
      return x;
    }
  }
  return 0.0;
}

double Family::Mean(const Param& p) const {
  switch (kind_) {
    case FamilyKind::kBernoulli:
      return p[0];
    case FamilyKind::kBinomial:
      return count_ * p[0];
    case FamilyKind::kMultinomial: {
      double m = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) m += (k + 1.0) * p[k];
      return m;
    }
    case FamilyKind::kPoisson:
      return p[0];
    case FamilyKind::kZeroTruncatedPoisson:
      return p[0] / -std::expm1(-p[0]);
    case FamilyKind::kGaussLocation:
      return p[0];
    case FamilyKind::kGaussScale:
      return fixed_;
    case FamilyKind::kZeroInflated:
      return p[0] * inner_->Mean(Param{p[1]});
  }
  return 0.0;
}

double Family::Variance(const Param& p) const {
  switch (kind_) {
    case FamilyKind::kBernoulli:
      return p[0] * (1.0 - p[0]);
    case FamilyKind::kBinomial:
      return count_ * p[0] * (1.0 - p[0]);
    case FamilyKind::kMultinomial: {
      double m1 = 0.0;
      double m2 = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        m1 += (k + 1.0) * p[k];
        m2 += (k + 1.0) * (k + 1.0) * p[k];
      }
      return m2 - m1 * m1;
    }
    case FamilyKind::kPoisson:
      return p[0];
    case FamilyKind::kZeroTruncatedPoisson: {
      const double g = p[0];
      const double z = -std::expm1(-g);
      const double m1 = g / z;
      const double m2 = (g + g * g) / z;
      return m2 - m1 * m1;
    }
    case FamilyKind::kGaussLocation:
      return fixed_;
    case FamilyKind::kGaussScale:
      return p[0];
    case FamilyKind::kZeroInflated: {
      const Param inner_p{p[1]};
      const double m = inner_->Mean(inner_p);
      const double second = inner_->Variance(inner_p) + m * m;
      const double mean = p[0] * m;
      return p[0] * second - mean * mean;
    }
  }
  return 0.0;
}

Param Family::Scale(const Param& p, double xi) const {
  if (xi == 1.0) return p;
  if (!(xi > 0.0 && xi <= 1.0)) ThrowInvalid("sparsity factor must be in (0, 1]");
  if (!supports_sparsity()) {
    ThrowInvalid(std::string(name()) + " has no sparsity part to scale");
  }
  Param out = p;
  out[0] *= xi;
  return out;
}

}  // namespace blockpost
