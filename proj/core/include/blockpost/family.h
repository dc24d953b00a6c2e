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

#ifndef BLOCKPOST_FAMILY_H_
#define BLOCKPOST_FAMILY_H_

#include <compare>
#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "blockpost/rng.h"

namespace blockpost {

// Parameter of one connectivity entry. Scalar families use one coordinate,
// zero-inflated families use (pi, gamma), multinomial uses the level
// probabilities.
class Param {
 public:
  Param() = default;
  Param(std::initializer_list<double> coords) : coords_(coords) {}
  explicit Param(std::vector<double> coords) : coords_(std::move(coords)) {}

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  // Exact (bitwise for finite values) comparison.
  bool operator==(const Param& other) const = default;
  std::partial_ordering operator<=>(const Param& other) const = default;

 private:
  std::vector<double> coords_;
};

// max_k |p_k - q_k|.
double SupDistance(const Param& p, const Param& q);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool Contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

enum class FamilyKind {
  kBernoulli,
  kBinomial,
  kMultinomial,
  kPoisson,
  kGaussLocation,
  kGaussScale,
  kZeroTruncatedPoisson,  // only valid as the inner part of kZeroInflated
  kZeroInflated,
};

std::string_view FamilyKindName(FamilyKind kind);

// Observation family together with its bounded parameter set.
class Family {
 public:
  static Family Bernoulli(double a);
  static Family Binomial(int trials, double a);
  static Family Multinomial(int levels, double a);
  static Family Poisson(double min, double max);
  static Family GaussLocation(double variance, double min, double max);
  // Variance is the parameter; `mean` is fixed across cells.
  static Family GaussScale(double mean, double min, double max);
  static Family ZeroTruncatedPoisson(double min, double max);
  // Sparsity pi in [a, 1-a] is the probability of a nonzero draw.
  static Family ZeroInflated(double a, const Family& inner);

  FamilyKind kind() const { return kind_; }
  std::string_view name() const { return FamilyKindName(kind_); }

  int trials() const { return count_; }
  int levels() const { return count_; }
  double variance() const { return fixed_; }
  double mean() const { return fixed_; }
  // Bound a of Pi = [a, 1-a] for probability-valued families.
  double a() const { return a_; }
  // Scalar parameter box; for zero-inflated this is the sparsity box.
  Interval bounds() const { return box_; }
  bool has_inner() const { return inner_ != nullptr; }
  const Family& inner() const;

  // Number of coordinates in a Param of this family.
  int param_dim() const;
  bool is_discrete() const;
  // Bernoulli and zero-inflated carry a sparsity part that xi can scale.
  bool supports_sparsity() const;

  bool InBounds(const Param& p, double tol = 0.0) const;
  // Throws InvalidArgument unless InBounds.
  void CheckBounds(const Param& p) const;
  // Shape check only (dimension, probabilities in (0,1), positive rates).
  bool IsValidParam(const Param& p) const;

  bool InSupport(double x) const;
  double LogDensity(double x, const Param& p) const;
  double Sample(const Param& p, CounterRng& rng) const;
  double Mean(const Param& p) const;
  double Variance(const Param& p) const;

  // Sparsity scaling: multiplies the Bernoulli/sparsity coordinate by xi.
  Param Scale(const Param& p, double xi) const;

 private:
  Family(FamilyKind kind, int count, double a, Interval box, double fixed,
         std::shared_ptr<const Family> inner)
      : kind_(kind), count_(count), a_(a), box_(box), fixed_(fixed),
        inner_(std::move(inner)) {}

  FamilyKind kind_;
  int count_;
  double a_;
  Interval box_;
  double fixed_;
  std::shared_ptr<const Family> inner_;
};

}  // namespace blockpost

#endif  // BLOCKPOST_FAMILY_H_
