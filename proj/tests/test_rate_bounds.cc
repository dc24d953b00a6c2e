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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blockpost/bounds.h"
#include "blockpost/divergence.h"
#include "blockpost/error.h"
#include "blockpost/rate.h"
#include "test_util.h"

namespace blockpost {
namespace {

using testing::BernoulliSbm;
using testing::MakeLbm;

TEST(Rate, BinaryHoeffdingValue) {
  const RateFunction psi = DefaultRateFunction(Family::Bernoulli(0.25), 0.5);
  const double l = std::log(3.0);
  EXPECT_NEAR(psi(1.0), 0.25 / (16.0 * l * l), 1e-15);
  EXPECT_NEAR(psi(1.0), 0.012946, 1e-6);
}

TEST(Rate, ShapeProperties) {
  RateOptions bern;
  bern.bernstein = true;
  for (const Family& f : testing::FamilyCatalogue()) {
    for (const RateOptions& o : {RateOptions{}, bern}) {
      const RateFunction psi = DefaultRateFunction(f, 0.4, o);
      double prev = 0.0;
      for (int k = 1; k <= 50; ++k) {
        const double v = psi(0.05 * k);
        EXPECT_GE(v, 0.0) << psi.name();
        EXPECT_GE(v, prev - 1e-15) << psi.name();
        prev = v;
      }
    }
  }
  for (const Family& f : {Family::Bernoulli(0.1), Family::GaussLocation(1.0, -1.0, 1.0)}) {
    EXPECT_LT(DefaultRateFunction(f, 0.5)(1e-6), 1e-10);
    EXPECT_LT(DefaultRateFunction(f, 0.5, bern)(1e-6), 1e-10);
  }
}

TEST(Rate, ExactChernoffAgreesWithClosedDualForGaussLocation) {
  // Cell log-ratio is Gaussian with variance (p - p')^2 / s2, so the exact
  // dual is x^2 s2 / (2 w^2) with w the box width.
  const Family f = Family::GaussLocation(1.5, -1.0, 1.0);
  for (double x : {0.1, 0.5, 1.0}) {
    EXPECT_NEAR(ExactChernoffMax(f, x), x * x * 1.5 / (2.0 * 4.0), 1e-7);
  }
}

TEST(Rate, ClosedFormsBelowExactRate) {
  RateOptions bern;
  bern.bernstein = true;
  RateOptions dual;
  dual.gauss_scale_exact_dual = true;
  for (const Family& f : testing::FamilyCatalogue()) {
    std::vector<RateOptions> variants{RateOptions{}};
    if (f.kind() == FamilyKind::kBernoulli) variants.push_back(bern);
    if (f.kind() == FamilyKind::kGaussScale) variants = {dual};
    const double mu = 0.5;
    const double top = 2.0 * KappaMax(f);
    for (const RateOptions& o : variants) {
      const RateFunction psi = DefaultRateFunction(f, mu, o);
      for (int k = 1; k <= 10; ++k) {
        const double x = top * k / 10.0;
        EXPECT_LE(psi(x), ExactChernoffRate(f, mu, x) * (1 + 1e-9) + 1e-15)
            << psi.name() << " x=" << x;
      }
    }
  }
}

TEST(Rate, GaussScaleDisplayedFormulaIsLinearAtZero) {
  // The displayed Gaussian-scale rate grows linearly near zero while every
  // Chernoff rate is quadratic there, so it exceeds the exact rate.
  const Family f = Family::GaussScale(0.3, 0.5, 3.0);
  const RateFunction psi = DefaultRateFunction(f, 0.5);
  EXPECT_GT(psi(1e-3), ExactChernoffRate(f, 0.5, 1e-3));
  EXPECT_NEAR(psi(2e-6) / psi(1e-6), 2.0, 1e-3);
}

TEST(Rate, BreveVariantsAreDistinct) {
  EXPECT_NE(BrevePsiDense(0.3, 0.1, 0.5), BrevePsiSparseBinary(0.3, 0.1, 0.5));
  for (double x : {0.01, 0.1, 1.0}) {
    EXPECT_GE(BrevePsiDense(x, 0.1, 0.5), 0.0);
    EXPECT_GE(BrevePsiSparseBinary(x, 0.1, 0.5), 0.0);
    EXPECT_GE(BrevePsiSparseWeighted(x, 0.1), 0.0);
  }
}

TEST(Rate, GoldenMaximizeFindsPeak) {
  const GoldenResult r = GoldenMaximize([](double x) { return -(x - 0.3) * (x - 0.3); }, -1, 2, 1e-10);
  EXPECT_NEAR(r.arg, 0.3, 1e-8);
}

TEST(Bounds, CMinExample) {
  const ConnectivityMatrix pi(1, 2, {Param{0.3}, Param{0.6}});
  EXPECT_NEAR(CMin(pi, 0.25), 0.15 / 18.0, 1e-15);
}

TEST(Bounds, SparseBinaryKappaScaling) {
  const Family f = Family::Bernoulli(0.25);
  const ConnectivityMatrix pi(1, 2, {Param{0.3}, Param{0.6}});
  const double c_min = CMin(pi, 0.25);
  for (double xi : {1.0, 0.1, 0.01, 0.001}) {
    const double kappa = std::min(KlDivergence(f, Param{0.3 * xi}, Param{0.6 * xi}),
                                  KlDivergence(f, Param{0.6 * xi}, Param{0.3 * xi}));
    EXPECT_NEAR(KappaMin(pi.WithXi(xi), f), kappa, 1e-15);
    EXPECT_GE(kappa, xi * c_min);
    const SparseScalings s = ComputeSparseScalings(pi, f, xi, 0.5);
    EXPECT_NEAR(s.kappa_lower, xi * c_min, 1e-18);
    EXPECT_NEAR(s.lipschitz, xi * 4.0, 1e-15);
  }
}

TEST(Bounds, SparseWeightedGenericInstance) {
  const Family inner = Family::GaussLocation(1.0, -1.0, 2.0);
  const Family f = Family::ZeroInflated(0.1, inner);
  const ConnectivityMatrix pi(2, 2, {Param{0.2, -0.5}, Param{0.5, 0.3}, Param{0.7, 1.2},
                                     Param{0.9, 1.8}});
  for (double xi : {1.0, 0.1, 0.01, 0.001}) {
    const SparseScalings s = ComputeSparseScalings(pi, f, xi, 0.5);
    EXPECT_GE(KappaMin(pi.WithXi(xi), f), s.kappa_lower);
  }
  const SparseScalings one = ComputeSparseScalings(pi, f, 1.0, 0.5);
  EXPECT_NEAR(one.lipschitz, 1.0 / 0.1 + LipschitzL0(inner), 1e-12);
}

TEST(Bounds, SparseWeightedBoundFailsWhenPairsShareSparsity) {
  // Entries that differ only in the inner coordinate at sparsity a give
  // D = xi a kappa~, below xi (c_min + a kappa~_min) whenever c_min > 0.
  const Family inner = Family::GaussLocation(1.0, -1.0, 2.0);
  const Family f = Family::ZeroInflated(0.1, inner);
  const ConnectivityMatrix pi(2, 2, {Param{0.1, 0.0}, Param{0.1, 1.0}, Param{0.9, 0.0},
                                     Param{0.9, 1.0}});
  for (double xi : {1.0, 0.1, 0.01}) {
    const SparseScalings s = ComputeSparseScalings(pi, f, xi, 0.5);
    const double pair = KlDivergence(f, Param{0.1 * xi, 0.0}, Param{0.1 * xi, 1.0});
    EXPECT_NEAR(pair, xi * 0.1 * 0.5, 1e-12);
    EXPECT_LT(KappaMin(pi.WithXi(xi), f), s.kappa_lower);
  }
}

TEST(Bounds, ConstantsForUniformProportions) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  const BoundReport r = TheoremConstants(spec, 0.0);
  EXPECT_EQ(r.K, 0.0);
  EXPECT_EQ(r.rate_constant(), r.c);
  const double kl = std::min(KlDivergence(spec.family(), Param{0.8}, Param{0.2}),
                             KlDivergence(spec.family(), Param{0.2}, Param{0.8}));
  EXPECT_NEAR(r.c, 0.25 * kl / 16.0, 1e-15);
  EXPECT_NEAR(r.C, 2.0 * KappaMax(spec.family()), 1e-15);
  EXPECT_EQ(r.sigma_size, 1u);
}

TEST(Bounds, EtaRangeEnforced) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  const BoundReport r = TheoremConstants(spec, 0.0);
  const double limit = r.c / (2.0 * r.L0);
  EXPECT_NO_THROW(TheoremConstants(spec, 0.5 * limit));
  for (double eta : {limit, 999.0, -0.1}) {
    try {
      TheoremConstants(spec, eta);
      FAIL() << eta;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kTheoryViolation);
    }
  }
}

TEST(Bounds, FormulasMatchDirectEvaluation) {
  const ModelSpec lbm = MakeLbm(Family::Bernoulli(0.1),
                                {Param{0.2}, Param{0.7}, Param{0.8}, Param{0.4}},
                                {0.4, 0.6}, {0.55, 0.45});
  const BoundReport r0 = TheoremConstants(lbm, 0.0);
  const double eta = 0.25 * r0.c / r0.L0;
  const BoundReport r = TheoremConstants(lbm, eta);
  const double e = r.c - 2.0 * r.L0 * eta;
  const double K = std::log(0.6 / 0.4);
  EXPECT_NEAR(r.K, K, 1e-15);
  const int n = 300, m = 200;
  EXPECT_NEAR(r.a_nm(n, m), n * std::exp(-e * m + K) + m * std::exp(-e * n + K), 1e-12);
  EXPECT_NEAR(r.b_nm(n, m), n * std::exp(-r.C * m - K) + m * std::exp(-r.C * n - K), 1e-300);
  const double psi = (*r.psi)(e);
  const double d = n * std::exp(-psi * m) + m * std::exp(-psi * n);
  EXPECT_NEAR(r.d_nm(n, m), d, 1e-9 * d);
  const double eps = 2.0 * 4 * std::exp(-200 * 0.16 / 2) + 2.0 * 1 * d * std::exp(d);
  EXPECT_NEAR(r.eps_nm(n, m), eps, 1e-9 * eps);

  const ModelSpec sbm = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  const BoundReport s = TheoremConstants(sbm, 0.0);
  EXPECT_NEAR(s.a_nm(100, 100), 100 * std::exp(-2 * 100 * s.c), 1e-12);
  EXPECT_NEAR(s.b_nm(10, 10), 10 * std::exp(-2 * s.C * 10), 1e-30);
}

TEST(Bounds, DecreasingPastThePeak) {
  const ModelSpec spec = BernoulliSbm({{0.8, 0.2}, {0.2, 0.2}}, {0.5, 0.5});
  const BoundReport r = TheoremConstants(spec, 0.0);
  const int a0 = static_cast<int>(std::ceil(1.0 / r.a_exponent()));
  double prev = r.a_nm(a0, a0);
  for (int n = a0 + 10; n < a0 + 2000; n += 10) {
    EXPECT_LT(r.a_nm(n, n), prev);
    prev = r.a_nm(n, n);
  }
  const double d0 = 20.0 / r.d_exponent();
  double prev_eps = r.eps_nm(static_cast<int>(d0), static_cast<int>(d0));
  for (double n = 2 * d0; n < 2e9 && n < 64 * d0; n *= 2) {
    const int k = static_cast<int>(n);
    EXPECT_LT(r.eps_nm(k, k), prev_eps);
    prev_eps = r.eps_nm(k, k);
  }
}

TEST(Bounds, IdentifiabilityRequired) {
  const ModelSpec flat = MakeLbm(Family::Bernoulli(0.1),
                                 {Param{0.2}, Param{0.2}, Param{0.7}, Param{0.7}},
                                 {0.5, 0.5}, {0.5, 0.5});
  EXPECT_THROW(TheoremConstants(flat, 0.0), Error);
}

TEST(Bounds, HelperInequalityRandom) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  std::uniform_int_distribution<int> k(1, 200);
  for (int t = 0; t < 10000; ++t) {
    const HelperCheck h = HelperInequality(u(rng), u(rng), k(rng), k(rng));
    EXPECT_TRUE(h.holds) << h.lhs << " " << h.rhs;
  }
  EXPECT_TRUE(HelperInequality(0, 0, 5, 5).holds);
}

}  // namespace
}  // namespace blockpost
