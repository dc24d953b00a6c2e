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

#ifndef BLOCKPOST_BOUNDS_H_
#define BLOCKPOST_BOUNDS_H_

#include <cstddef>
#include <memory>
#include <string>

#include "blockpost/model.h"
#include "blockpost/rate.h"
#include "blockpost/symmetry.h"

namespace blockpost {

// Which set of constants feeds the finite-n bounds.
enum class BoundRegime {
  kDense,
  kSparseBinary,    // Bernoulli with xi-scaled entries
  kSparseWeighted,  // zero-inflated with xi-scaled sparsity part
};

std::string_view BoundRegimeName(BoundRegime regime);

// Sparse-regime lower bounds computed from the unscaled connectivity matrix.
struct SparseScalings {
  bool weighted = false;
  double xi = 1.0;
  double a = 0.0;
  double mu_min = 1.0;
  double c_min = 0.0;            // over the sparsity coordinate
  double kappa_tilde_min = 0.0;  // inner-family KL, weighted case only
  double kappa_lower = 0.0;      // xi c_min, or xi (c_min + a kappa~_min)
  double lipschitz = 0.0;        // xi / a, or xi (1/a + L~0)
  std::shared_ptr<const Family> inner;

  // Lower bound on psi*(xi x): xi breve(x), or the weighted composite.
  double PsiLower(double x) const;
};

// c_min = 1/2 (a/(1-a))^2 min (p - p')^2 / p over ordered pairs of distinct
// sparsity coordinates. Returns 0 when all coordinates coincide.
double CMin(const ConnectivityMatrix& pi_unscaled, double a);

// `pi_unscaled` carries xi = 1; `family` is Bernoulli or zero-inflated.
SparseScalings ComputeSparseScalings(const ConnectivityMatrix& pi_unscaled,
                                     const Family& family, double xi,
                                     double mu_min);

struct BoundOptions {
  RateOptions rate;
  SymmetryOptions symmetry;
  // Use the sparse-regime constants even when xi = 1.
  bool sparse_form = false;
};

struct BoundReport {
  BoundRegime regime = BoundRegime::kDense;
  bool sbm = false;
  int Q = 1;
  int L = 1;
  double mu_min = 1.0;
  double alpha_min = 1.0;
  double xi = 1.0;
  double eta = 0.0;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double L0 = 0.0;
  double c = 0.0;
  double C = 0.0;
  double K = 0.0;
  std::size_t sigma_size = 1;
  double tail_factor = 2.0;
  std::string rate_name;
  std::shared_ptr<const RateFunction> psi;        // dense rate
  std::shared_ptr<const SparseScalings> sparse;   // sparse regimes

  // c - 2 L0 eta.
  double rate_constant() const { return c - 2.0 * L0 * eta; }
  // Multiplier of the sample size in the a_{n,m} exponent (xi c1 when sparse).
  double a_exponent() const;
  // Multiplier of the sample size in the d_{n,m} exponent.
  double d_exponent() const;
  double psi_star(double x) const;

  double a_nm(int n, int m) const;
  double b_nm(int n, int m) const;
  double d_nm(int n, int m) const;
  double eps_nm(int n, int m) const;
  // Lower bound on the class mass: 1 - |Sigma| a e^a (Sigma-free form when
  // `with_sigma` is false).
  double class_mass_lower(int n, int m, bool with_sigma = true) const;
};

// Throws TheoryViolation unless 0 <= eta < c / (2 L0) and the spec passes
// the identifiability precondition.
BoundReport TheoremConstants(const ModelSpec& spec, double eta,
                             const BoundOptions& options = {});

struct HelperCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
// (1+u)^n (1+v)^m - 1 <= (nu + mv) exp(nu + mv).
HelperCheck HelperInequality(double u, double v, double n, double m);

}  // namespace blockpost

#endif  // BLOCKPOST_BOUNDS_H_
