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

#ifndef BLOCKPOST_POSTERIOR_H_
#define BLOCKPOST_POSTERIOR_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "blockpost/model.h"
#include "blockpost/symmetry.h"

namespace blockpost {

// log f(x_ij; pi_k) for every cell of the index set and every entry k of the
// effective connectivity matrix (row-major entry index q * L + l).
class LogDensityTable {
 public:
  LogDensityTable(const ObservationMatrix& x, const ConnectivityMatrix& pi,
                  const Family& family);

  int n() const { return n_; }
  int m() const { return m_; }
  int entries() const { return k_; }
  IndexSetKind index_set() const { return kind_; }
  double at(int i, int j, int entry) const {
    return values_[(std::size_t(i) * m_ + j) * k_ + entry];
  }

 private:
  int n_;
  int m_;
  int k_;
  IndexSetKind kind_;
  std::vector<double> values_;
};

// sum log alpha_{z_i} + sum log beta_{w_j}; SBM keeps the alpha term only.
double LogPrior(const Configuration& c, const ModelSpec& theta);

// Log-likelihood plus log-prior. May be -infinity when a density vanishes.
double LogUnnormalizedPosterior(const ObservationMatrix& x,
                                const Configuration& c, const ModelSpec& theta);

struct PosteriorOptions {
  std::uint64_t max_configs = std::uint64_t{1} << 24;
  int threads = 1;
};

// Number of configurations Q^n L^m (LBM) or Q^n (SBM), saturating at
// UINT64_MAX.
std::uint64_t ConfigurationCount(int n, int m, int Q, int L, bool tied);

// Configuration with odometer rank `index` (z most significant, then w).
Configuration ConfigurationAt(std::size_t index, int n, int m, int Q, int L,
                              bool tied);

// Every configuration in odometer order (z most significant, then w) with its
// normalised log-mass.
class PosteriorTable {
 public:
  PosteriorTable(int n, int m, int Q, int L, bool tied,
                 std::vector<double> log_unnormalized);

  std::size_t size() const { return log_unnormalized_.size(); }
  int n() const { return n_; }
  int m() const { return m_; }
  int Q() const { return q_; }
  int L() const { return l_; }
  bool tied() const { return tied_; }

  Configuration ConfigAt(std::size_t index) const;
  std::size_t IndexOf(const Configuration& c) const;

  double log_unnormalized(std::size_t index) const { return log_unnormalized_[index]; }
  double log_normalizer() const { return log_normalizer_; }
  double log_mass(std::size_t index) const;
  double mass(std::size_t index) const;
  // Entries whose unnormalised value is -infinity.
  std::size_t impossible_count() const { return impossible_; }
  // Indices of the k largest masses, ties by index.
  std::vector<std::size_t> Top(std::size_t k) const;

 private:
  int n_;
  int m_;
  int q_;
  int l_;
  bool tied_;
  std::vector<double> log_unnormalized_;
  double log_normalizer_ = 0.0;
  std::size_t impossible_ = 0;
};

// Throws CapExceeded when the configuration count exceeds the cap.
PosteriorTable ExactPosterior(const ObservationMatrix& x, const ModelSpec& theta,
                              const PosteriorOptions& options = {});

// Sum of masses over the Sigma-orbit of c.
double PosteriorMassOfClass(const PosteriorTable& table, const Configuration& c,
                            const SymmetryGroup& sigma);

struct ClassMass {
  Configuration representative;
  std::size_t orbit_size;
  double mass;
};
// One row per equivalence class, keyed by canonical representative, sorted
// by decreasing mass then representative.
std::vector<ClassMass> ClassMasses(const PosteriorTable& table,
                                   const SymmetryGroup& sigma);

// Largest mass; entries within 1e-10 in log space of the maximum count as
// tied and the smallest index wins.
inline constexpr double kMapTieTolerance = 1e-10;
Configuration MapConfiguration(const PosteriorTable& table);

// sum over I of log f(x; pi_{z*w*}) - log f(x; pi_{zw}).
double DeltaStatistic(const ObservationMatrix& x, const Configuration& c_star,
                      const Configuration& c, const ConnectivityMatrix& pi,
                      const Family& family);

// Conditional expectation of DeltaStatistic under pi_star at c_star.
double ExpectedDelta(const Configuration& c_star, const Configuration& c,
                     const ConnectivityMatrix& pi,
                     const ConnectivityMatrix& pi_star, const Family& family,
                     IndexSetKind index_set);

struct Misclassification {
  int raw = 0;
  int up_to_equivalence = 0;
};
// raw = ||z^ - z||_0 + ||w^ - w||_0 (z only in SBM).
Misclassification CountMisclassified(const Configuration& c_hat,
                                     const Configuration& c_true,
                                     const SymmetryGroup& sigma);

}  // namespace blockpost

#endif  // BLOCKPOST_POSTERIOR_H_
