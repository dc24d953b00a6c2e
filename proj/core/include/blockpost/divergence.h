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

#ifndef BLOCKPOST_DIVERGENCE_H_
#define BLOCKPOST_DIVERGENCE_H_

#include "blockpost/family.h"
#include "blockpost/model.h"

namespace blockpost {

// E_{p''}[log f(X; p) - log f(X; p')], closed form for every family.
double CrossTerm(const Family& family, const Param& p, const Param& p_prime,
                 const Param& p_truth);

// D(p || p') = CrossTerm(p, p', p).
double KlDivergence(const Family& family, const Param& p, const Param& p_prime);

// min D(pi_ql || pi_q'l') over ordered pairs of distinct entries, with xi
// folded in. Throws TheoryViolation when all entries coincide.
double KappaMin(const ConnectivityMatrix& pi, const Family& family);

// sup of D over the family's parameter set; `xi` scales the sparsity part.
// Exponential-family KL grows away from the diagonal in each argument, so
// the sup sits on box corners (simplex vertices for multinomial).
double KappaMax(const Family& family, double xi = 1.0);

// Lipschitz constant L0 of p -> CrossTerm(p, p', p'') in the sup norm.
double LipschitzL0(const Family& family);

// Vertices of {p in simplex : a <= p_k <= 1 - a}.
std::vector<Param> MultinomialVertices(int levels, double a);

}  // namespace blockpost

#endif  // BLOCKPOST_DIVERGENCE_H_
