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

#include "blockpost/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "blockpost/error.h"

namespace blockpost {
namespace {

constexpr double kSumTol = 1e-12;

void CheckProportions(const std::vector<double>& v, std::string_view what) {
  if (v.empty()) ThrowInvalid(std::string(what) + " must be nonempty");
  double sum = 0.0;
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      ThrowInvalid(std::string(what) + " entries must be positive");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    ThrowInvalid(std::string(what) + " must sum to 1 (within 1e-12)");
  }
}

}  // namespace

std::string_view IndexSetName(IndexSetKind kind) {
  switch (kind) {
    case IndexSetKind::kFull:
      return "full";
    case IndexSetKind::kNoDiag:
      return "no_diag";
    case IndexSetKind::kUpper:
      return "upper";
  }
  return "full";
}

IndexSetKind ParseIndexSet(std::string_view name) {
  if (name == "full") return IndexSetKind::kFull;
  if (name == "no_diag") return IndexSetKind::kNoDiag;
  if (name == "upper") return IndexSetKind::kUpper;
  ThrowInvalid("unknown index set '" + std::string(name) + "'");
}

ModelVariant ModelVariant::Sbm(bool directed, bool self_loops) {
  if (!directed && self_loops) {
    ThrowInvalid("undirected SBM with self-loops is not supported");
  }
  return ModelVariant{Kind::kSbm, directed, self_loops};
}

IndexSetKind ModelVariant::index_set() const {
  if (!is_sbm()) return IndexSetKind::kFull;
  if (!directed) return IndexSetKind::kUpper;
  return self_loops ? IndexSetKind::kFull : IndexSetKind::kNoDiag;
}

std::vector<Cell> IndexSetCells(int n, int m, IndexSetKind kind) {
  std::vector<Cell> cells;
  cells.reserve(IndexSetSize(n, m, kind));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (kind == IndexSetKind::kNoDiag && i == j) continue;
      if (kind == IndexSetKind::kUpper && j <= i) continue;
      cells.push_back({i, j});
    }
  }
  return cells;
}

std::size_t IndexSetSize(int n, int m, IndexSetKind kind) {
  const auto nn = static_cast<std::size_t>(n);
  switch (kind) {
    case IndexSetKind::kFull:
      return nn * static_cast<std::size_t>(m);
    case IndexSetKind::kNoDiag:
      return nn * (nn - 1);
    case IndexSetKind::kUpper:
      return nn * (nn - 1) / 2;
  }
  return 0;
}

ConnectivityMatrix::ConnectivityMatrix(int rows, int cols,
                                       std::vector<Param> entries, double xi)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), xi_(xi) {
  if (rows < 1 || cols < 1) ThrowInvalid("connectivity matrix must be nonempty");
  if (entries_.size() != static_cast<std::size_t>(rows) * cols) {
    ThrowInvalid("connectivity matrix has " + std::to_string(entries_.size()) +
                 " entries, expected " + std::to_string(rows * cols));
  }
  if (!(xi > 0.0 && xi <= 1.0)) ThrowInvalid("xi must lie in (0, 1]");
}

ConnectivityMatrix ConnectivityMatrix::Effective(const Family& family) const {
  if (xi_ == 1.0) return *this;
  std::vector<Param> scaled;
  scaled.reserve(entries_.size());
  for (const Param& p : entries_) scaled.push_back(family.Scale(p, xi_));
  return ConnectivityMatrix(rows_, cols_, std::move(scaled), 1.0);
}

ConnectivityMatrix ConnectivityMatrix::WithXi(double xi) const {
  return ConnectivityMatrix(rows_, cols_, entries_, xi);
}

bool ConnectivityMatrix::RowsDistinct() const {
  for (int q = 0; q < rows_; ++q) {
    for (int r = q + 1; r < rows_; ++r) {
      bool same = true;
      for (int l = 0; l < cols_ && same; ++l) same = at(q, l) == at(r, l);
      if (same) return false;
    }
  }
  return true;
}

bool ConnectivityMatrix::ColumnsDistinct() const {
  for (int l = 0; l < cols_; ++l) {
    for (int k = l + 1; k < cols_; ++k) {
      bool same = true;
      for (int q = 0; q < rows_ && same; ++q) same = at(q, l) == at(q, k);
      if (same) return false;
    }
  }
  return true;
}

double SupDistance(const ConnectivityMatrix& a, const ConnectivityMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    ThrowInvalid("connectivity matrices differ in shape");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k) {
    d = std::max(d, SupDistance(a.entries()[k], b.entries()[k]));
  }
  return d;
}

ModelSpec::ModelSpec(ModelVariant variant, std::vector<double> alpha,
                     std::vector<double> beta, ConnectivityMatrix pi,
                     Family family)
    : variant_(variant),
      alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      pi_(std::move(pi)),
      family_(std::move(family)) {
  if (variant_.is_sbm() && !variant_.directed && variant_.self_loops) {
    ThrowInvalid("undirected SBM with self-loops is not supported");
  }
  CheckProportions(alpha_, "alpha");
  if (variant_.is_sbm()) {
    if (beta_.empty()) beta_ = alpha_;
    if (beta_.size() != alpha_.size()) ThrowInvalid("SBM requires beta = alpha");
    for (std::size_t q = 0; q < alpha_.size(); ++q) {
      if (std::abs(beta_[q] - alpha_[q]) > kSumTol) {
        ThrowInvalid("SBM requires beta = alpha");
      }
    }
  }
  CheckProportions(beta_, "beta");
  if (family_.kind() == FamilyKind::kZeroTruncatedPoisson) {
    ThrowInvalid("zero_truncated_poisson is only available as a zero-inflated inner family");
  }
  if (pi_.rows() != Q() || pi_.cols() != L()) {
    ThrowInvalid("pi must be Q x L (" + std::to_string(Q()) + " x " +
                 std::to_string(L()) + ")");
  }
  if (pi_.xi() != 1.0 && !family_.supports_sparsity()) {
    ThrowInvalid("xi != 1 requires a bernoulli or zero_inflated family");
  }
  for (const Param& p : pi_.entries()) family_.CheckBounds(p);
}

double ModelSpec::alpha_min() const {
  return *std::min_element(alpha_.begin(), alpha_.end());
}
double ModelSpec::alpha_max() const {
  return *std::max_element(alpha_.begin(), alpha_.end());
}
double ModelSpec::beta_min() const {
  return *std::min_element(beta_.begin(), beta_.end());
}
double ModelSpec::beta_max() const {
  return *std::max_element(beta_.begin(), beta_.end());
}
double ModelSpec::mu_min() const { return std::min(alpha_min(), beta_min()); }
double ModelSpec::mu_max() const { return std::max(alpha_max(), beta_max()); }

bool ModelSpec::IsIdentifiable() const {
  return pi_.RowsDistinct() && pi_.ColumnsDistinct();
}

ModelSpec ModelSpec::WithPi(ConnectivityMatrix pi) const {
  return ModelSpec(variant_, alpha_, beta_, std::move(pi), family_);
}

Configuration::Configuration(std::vector<int> z, int Q, std::vector<int> w,
                             int L, bool tied)
    : z_(std::move(z)), w_(std::move(w)), q_(Q), l_(L), tied_(tied) {
  if (Q < 1 || L < 1) ThrowInvalid("group counts must be positive");
  if (z_.empty() || (!tied_ && w_.empty())) {
    ThrowInvalid("configuration must have at least one row and column");
  }
  for (int q : z_) {
    if (q < 0 || q >= Q) ThrowInvalid("row label out of range");
  }
  for (int l : w_) {
    if (l < 0 || l >= L) ThrowInvalid("column label out of range");
  }
}

Configuration Configuration::Lbm(std::vector<int> z, int Q, std::vector<int> w,
                                 int L) {
  return Configuration(std::move(z), Q, std::move(w), L, false);
}

Configuration Configuration::Sbm(std::vector<int> z, int Q) {
  return Configuration(std::move(z), Q, {}, Q, true);
}

void Configuration::set_z(int i, int q) {
  if (q < 0 || q >= q_) ThrowInvalid("row label out of range");
  z_.at(i) = q;
}

void Configuration::set_w(int j, int l) {
  if (tied_) {
    set_z(j, l);
    return;
  }
  if (l < 0 || l >= l_) ThrowInvalid("column label out of range");
  w_.at(j) = l;
}

bool Configuration::operator==(const Configuration& other) const {
  return tied_ == other.tied_ && q_ == other.q_ && l_ == other.l_ &&
         z_ == other.z_ && w_ == other.w_;
}

std::strong_ordering Configuration::operator<=>(
    const Configuration& other) const {
  if (auto c = z_ <=> other.z_; c != 0) return c;
  return w_ <=> other.w_;
}

void CheckConfiguration(const Configuration& c, const ModelSpec& spec) {
  if (c.tied() != spec.is_sbm()) {
    ThrowInvalid("configuration kind does not match the model variant");
  }
  if (c.Q() != spec.Q() || c.L() != spec.L()) {
    ThrowInvalid("configuration group counts differ from the spec");
  }
}

void CheckSameShape(const Configuration& a, const Configuration& b) {
  if (a.tied() != b.tied() || a.n() != b.n() || a.m() != b.m() ||
      a.Q() != b.Q() || a.L() != b.L()) {
    ThrowInvalid("configurations differ in dimensions");
  }
}

ObservationMatrix::ObservationMatrix(int n, int m, IndexSetKind kind)
    : n_(n), m_(m), kind_(kind) {
  if (n < 1 || m < 1) ThrowInvalid("observation matrix must be nonempty");
  if (kind != IndexSetKind::kFull && n != m) {
    ThrowInvalid("no_diag and upper index sets require n = m");
  }
  values_.assign(static_cast<std::size_t>(n) * m, 0.0);
}

bool ObservationMatrix::Contains(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= m_) return false;
  switch (kind_) {
    case IndexSetKind::kFull:
      return true;
    case IndexSetKind::kNoDiag:
      return i != j;
    case IndexSetKind::kUpper:
      return i < j;
  }
  return false;
}

double ObservationMatrix::at(int i, int j) const {
  if (kind_ == IndexSetKind::kUpper && i > j) std::swap(i, j);
  if (!Contains(i, j)) {
    ThrowInvalid("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                 ") is outside the index set");
  }
  return raw(i, j);
}

void ObservationMatrix::set(int i, int j, double value) {
  if (!Contains(i, j)) {
    ThrowInvalid("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                 ") is outside the index set");
  }
  values_[static_cast<std::size_t>(i) * m_ + j] = value;
}

}  // namespace blockpost
