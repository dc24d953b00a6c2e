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

#ifndef BLOCKPOST_RATE_H_
#define BLOCKPOST_RATE_H_

#include <functional>
#include <memory>
#include <optional>
#include <string_view>

#include "blockpost/family.h"

namespace blockpost {

// ---------------------------------------------------------------------------
// Exact Cramer-Chernoff machinery.
//
// For one cell, Y = log f(X; p) - log f(X; p') - E_{p''}[...] with X ~ p''.
// PsiMax(lambda) is the sup over (p, p', p'') in the parameter box of the
// centred log-MGF of Y. `xi` scales the box of the sparsity coordinate.
// ---------------------------------------------------------------------------

double CentredLogMgf(const Family& family, const Param& p, const Param& p_prime,
                     const Param& p_truth, double lambda);
double PsiMax(const Family& family, double lambda, double xi = 1.0);
// Largest lambda with finite PsiMax (infinity when unrestricted).
double PsiMaxDomain(const Family& family, double xi = 1.0);
// sup_lambda (lambda x - PsiMax(lambda)), golden-section on the concave dual.
double ExactChernoffMax(const Family& family, double x, double xi = 1.0);
// mu_min^2 / 8 * ExactChernoffMax. Zero-inflated: the smaller of the exact
// duals of the inner and the binary parts, both at x / 2.
double ExactChernoffRate(const Family& family, double mu_min, double x,
                         double xi = 1.0);
// sup_lambda (lambda x - exp(PsiMax(lambda)) + 1) for the inner family of a
// zero-inflated model (sparse weighted regime).
double TildePsiStar(const Family& inner, double x);

// ---------------------------------------------------------------------------
// Closed-form rate functions.
// ---------------------------------------------------------------------------

enum class RateKind {
  kBinaryHoeffding,
  kBinaryBernstein,  // box xi [a, 1 - a]
  kBreveDense,         // small-deviation binary rate, dense-section form
  kBreveSparseBinary,      // sparse binary form (a in the variance term)
  kBreveSparseWeighted,      // sparse weighted form (no mu_min factor)
  kBinomial,
  kMultinomial,
  kPoisson,
  kGaussLocation,
  kGaussScale,          // displayed formula with free constant sigma2
  kGaussScaleExactDual, // mu^2/16 (y - log(1 + y)), y = 2 pi_min x / width
  kZeroInflated,        // min(mu^2 psi~*_max(x/2) / 8, psi*_bin(x/2))
};

std::string_view RateKindName(RateKind kind);

struct RateParams {
  double mu_min = 1.0;
  double a = 0.0;       // probability-valued families
  double xi = 1.0;      // Bernstein box scale
  int count = 1;        // binomial trials / multinomial levels
  double pi_min = 0.0;  // Poisson, Gaussian bounds
  double pi_max = 0.0;
  double sigma2 = 0.0;  // Gaussian location variance, or the free constant
  std::shared_ptr<const Family> inner;  // zero-inflated inner family
};

class RateFunction {
 public:
  RateFunction(RateKind kind, RateParams params);

  double operator()(double x) const;
  RateKind kind() const { return kind_; }
  std::string_view name() const { return RateKindName(kind_); }
  const RateParams& params() const { return params_; }
  // Multiplier in front of exp(-psi* D) in the tail bound.
  double tail_factor() const { return kind_ == RateKind::kZeroInflated ? 4.0 : 2.0; }

 private:
  RateKind kind_;
  RateParams params_;
};

struct RateOptions {
  // Binary: use the Bernstein form instead of Hoeffding.
  bool bernstein = false;
  double xi = 1.0;
  // Gaussian scale: the formula's free constant; defaults to pi_min.
  std::optional<double> gauss_scale_sigma2;
  bool gauss_scale_exact_dual = false;
};

// The closed-form rate displayed for the family.
RateFunction DefaultRateFunction(const Family& family, double mu_min,
                                 const RateOptions& options = {});

// Standalone small-deviation forms; l = log((1 - a) / a).
double BrevePsiDense(double x, double a, double mu_min);
double BrevePsiSparseBinary(double x, double a, double mu_min);
double BrevePsiSparseWeighted(double x, double a);

// Golden-section maximiser of a unimodal function on [lo, hi].
struct GoldenResult {
  double arg;
  double value;
};
GoldenResult GoldenMaximize(const std::function<double(double)>& f, double lo,
                            double hi, double tol = 1e-9, int max_iter = 200);

}  // namespace blockpost

#endif  // BLOCKPOST_RATE_H_
