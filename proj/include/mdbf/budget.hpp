/* Copyright 2026 The MDBF Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MDBF_BUDGET_HPP_
#define MDBF_BUDGET_HPP_

#include "mdbf/errors.hpp"
#include "mdbf/linalg.hpp"

namespace mdbf {

/// Inputs of the bits-per-weight accounting for an n x m matrix stored as
/// p terms with envelope rank l and real scalars of real_bits width.
struct BudgetSpec {
  Index n = 0;
  Index m = 0;
  Index l = 1;
  Index p = 1;
  int real_bits = 16;      // 16 or 32
  double target_bpw = 0.0;
};

/// Stored bits per weight at inner rank R. Per term: R*(n+m) sign bits
/// plus real_bits * l * (n + m + 2R) bits for the real factors A, B, Q, G.
/// Container header bytes are excluded (asymptotically negligible).
double bpw(const BudgetSpec& spec, Index rank);

/// Largest inner rank R with bpw(spec, R) <= target_bpw, subject to
/// l <= R <= min(n, m). Throws BudgetInfeasibleError (carrying the minimum
/// achievable bpw) when no such rank exists.
Index max_rank(const BudgetSpec& spec);

}  // namespace mdbf

#endif  // MDBF_BUDGET_HPP_
