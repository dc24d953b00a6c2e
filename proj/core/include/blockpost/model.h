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

#ifndef BLOCKPOST_MODEL_H_
#define BLOCKPOST_MODEL_H_

#include <compare>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "blockpost/family.h"

namespace blockpost {

enum class IndexSetKind {
  kFull,    // all (i, j) in n x m
  kNoDiag,  // square, i != j
  kUpper,   // square, i < j
};

std::string_view IndexSetName(IndexSetKind kind);
IndexSetKind ParseIndexSet(std::string_view name);

struct ModelVariant {
  enum class Kind { kLbm, kSbm };

  Kind kind = Kind::kLbm;
  bool directed = true;
  bool self_loops = true;

  static ModelVariant Lbm() { return {}; }
  // Undirected SBM with self-loops has no index set in the model and is
  // rejected.
  static ModelVariant Sbm(bool directed, bool self_loops);

  bool is_sbm() const { return kind == Kind::kSbm; }
  IndexSetKind index_set() const;
  bool operator==(const ModelVariant&) const = default;
};

struct Cell {
  int i;
  int j;
};

// Cells of the index set in row-major order.
std::vector<Cell> IndexSetCells(int n, int m, IndexSetKind kind);
std::size_t IndexSetSize(int n, int m, IndexSetKind kind);

// Q x L matrix of entry parameters, optionally scaled by a sparsity factor.
class ConnectivityMatrix {
 public:
  ConnectivityMatrix() = default;
  ConnectivityMatrix(int rows, int cols, std::vector<Param> entries,
                     double xi = 1.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double xi() const { return xi_; }
  const Param& at(int q, int l) const { return entries_[q * cols_ + l]; }
  Param& at(int q, int l) { return entries_[q * cols_ + l]; }
  const std::vector<Param>& entries() const { return entries_; }

  // Entries with xi folded in (xi of the result is 1).
  ConnectivityMatrix Effective(const Family& family) const;
  ConnectivityMatrix WithXi(double xi) const;

  // No two identical rows and no two identical columns.
  bool RowsDistinct() const;
  bool ColumnsDistinct() const;

  bool operator==(const ConnectivityMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Param> entries_;
  double xi_ = 1.0;
};

// sup over entries of the sup-norm difference.
double SupDistance(const ConnectivityMatrix& a, const ConnectivityMatrix& b);

// Full parameter theta = (mu, pi) plus model variant and family.
class ModelSpec {
 public:
  // Validates every invariant; SBM accepts an empty beta (set to alpha).
  ModelSpec(ModelVariant variant, std::vector<double> alpha,
            std::vector<double> beta, ConnectivityMatrix pi, Family family);

  const ModelVariant& variant() const { return variant_; }
  bool is_sbm() const { return variant_.is_sbm(); }
  int Q() const { return static_cast<int>(alpha_.size()); }
  int L() const { return static_cast<int>(beta_.size()); }
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<double>& beta() const { return beta_; }
  const ConnectivityMatrix& pi() const { return pi_; }
  const Family& family() const { return family_; }

  double alpha_min() const;
  double alpha_max() const;
  double beta_min() const;
  double beta_max() const;
  double mu_min() const;
  double mu_max() const;

  // Identifiability precondition: no two rows (or columns) of pi coincide.
  bool IsIdentifiable() const;

  // Copy with another connectivity matrix (validated against the family).
  ModelSpec WithPi(ConnectivityMatrix pi) const;

 private:
  ModelVariant variant_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  ConnectivityMatrix pi_;
  Family family_;
};

// Latent assignment; labels are 0-based. In SBM w is z.
class Configuration {
 public:
  static Configuration Lbm(std::vector<int> z, int Q, std::vector<int> w,
                           int L);
  static Configuration Sbm(std::vector<int> z, int Q);

  bool tied() const { return tied_; }
  int n() const { return static_cast<int>(z_.size()); }
  int m() const { return tied_ ? n() : static_cast<int>(w_.size()); }
  int Q() const { return q_; }
  int L() const { return l_; }
  std::span<const int> z() const { return z_; }
  std::span<const int> w() const { return tied_ ? std::span<const int>(z_) : w_; }
  int z(int i) const { return z_[i]; }
  int w(int j) const { return tied_ ? z_[j] : w_[j]; }

  void set_z(int i, int q);
  // In SBM this writes z as well.
  void set_w(int j, int l);

  bool operator==(const Configuration& other) const;
  // Lexicographic on z, then w.
  std::strong_ordering operator<=>(const Configuration& other) const;

 private:
  Configuration(std::vector<int> z, int Q, std::vector<int> w, int L,
                bool tied);

  std::vector<int> z_;
  std::vector<int> w_;
  int q_ = 1;
  int l_ = 1;
  bool tied_ = false;
};

// Throws unless the configuration fits the spec's variant and group counts.
void CheckConfiguration(const Configuration& c, const ModelSpec& spec);
void CheckSameShape(const Configuration& a, const Configuration& b);

// Observations over an index set. Dense storage; cells outside the index
// set are not addressable.
class ObservationMatrix {
 public:
  ObservationMatrix(int n, int m, IndexSetKind kind);

  int n() const { return n_; }
  int m() const { return m_; }
  IndexSetKind index_set() const { return kind_; }
  std::size_t size() const { return IndexSetSize(n_, m_, kind_); }

  bool Contains(int i, int j) const;
  // Undirected storage is symmetrised on read: at(j, i) == at(i, j).
  double at(int i, int j) const;
  void set(int i, int j, double value);
  // Value at a cell known to be in the index set, without checks.
  double raw(int i, int j) const { return values_[std::size_t(i) * m_ + j]; }

  bool operator==(const ObservationMatrix&) const = default;

 private:
  int n_;
  int m_;
  IndexSetKind kind_;
  std::vector<double> values_;
};

}  // namespace blockpost

#endif  // BLOCKPOST_MODEL_H_
