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

#include "mdbf/budget.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdbf {

namespace {

void validate_spec(const BudgetSpec& spec) {
  if (spec.n < 1 || spec.m < 1 || spec.l < 1 || spec.p < 1) {
    throw InvalidArgumentError("budget spec: dimensions must be positive");
  }
  if (spec.real_bits != 16 && spec.real_bits != 32) {
    throw InvalidArgumentError("budget spec: real_bits must be 16 or 32");
  }
  if (spec.l > std::min(spec.n, spec.m)) {
    throw InvalidArgumentError("budget spec: l exceeds min(n, m)");
  }
}

}  // namespace

double bpw(const BudgetSpec& spec, Index rank) {
  validate_spec(spec);
  if (rank < 1) {
    throw InvalidArgumentError("bpw: rank must be positive");
  }
  const double sign_bits = static_cast<double>(rank) * (spec.n + spec.m);
  const double real_bits = static_cast<double>(spec.real_bits) * spec.l *
                           (spec.n + spec.m + 2.0 * rank);
  return spec.p * (sign_bits + real_bits) /
         (static_cast<double>(spec.n) * static_cast<double>(spec.m));
}

Index max_rank(const BudgetSpec& spec) {
  validate_spec(spec);
  if (!(spec.target_bpw > 0.0)) {
    throw InvalidArgumentError("max_rank: target bpw must be positive");
  }
  const Index rank_cap = std::min(spec.n, spec.m);

  // bpw is affine and strictly increasing in the rank, so invert it and
  // nudge the integer candidate across any floating-point boundary.
  const double numer =
      spec.target_bpw * spec.n * spec.m / spec.p -
      static_cast<double>(spec.real_bits) * spec.l * (spec.n + spec.m);
  const double denom = spec.n + spec.m + 2.0 * spec.real_bits * spec.l;
  Index rank = static_cast<Index>(std::floor(numer / denom));
  rank = std::clamp<Index>(rank, spec.l, rank_cap);
  while (rank < rank_cap && bpw(spec, rank + 1) <= spec.target_bpw) {
    ++rank;
  }
  while (rank > spec.l && bpw(spec, rank) > spec.target_bpw) {
    --rank;
  }

  if (bpw(spec, rank) > spec.target_bpw) {
    const double floor_bpw = bpw(spec, spec.l);
    throw BudgetInfeasibleError(
        "budget infeasible: target " + std::to_string(spec.target_bpw) +
            " bpw is below the minimum achievable " +
            std::to_string(floor_bpw) + " bpw (at rank " +
            std::to_string(spec.l) + ")",
        floor_bpw);
  }
  return rank;
}

}  // namespace mdbf
