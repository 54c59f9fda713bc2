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

#ifndef MDBF_SWEEP_HPP_
#define MDBF_SWEEP_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "mdbf/factorizer.hpp"

namespace mdbf {

/// One named input matrix of a sweep.
struct SweepInput {
  std::string id;
  DenseMatrix w;
};

/// Grid axes. A sweep emits one row per (input, bpw, l, p) combination,
/// in that nesting order.
struct SweepGrid {
  std::vector<double> bpw;
  std::vector<Index> l;
  std::vector<Index> p;
};

struct SweepOptions {
  int real_bits = 16;
  FitConfig fit;
  int jobs = 0;              // 0 = hardware concurrency
  bool zero_seconds = false; // reproducible mode: report 0 in the CSV
};

/// One result row. bpw is the grid coordinate (the target budget); the
/// chosen rank makes the achieved budget recomputable. Failed cells carry
/// rank 0 and a NaN error.
struct SweepRow {
  std::string matrix_id;
  Index n = 0;
  Index m = 0;
  Index r = 0;
  Index l = 0;
  Index p = 0;
  double bpw = 0.0;
  double rel_error = 0.0;
  double seconds = 0.0;
};

inline constexpr const char* kSweepCsvHeader =
    "matrix_id,n,m,r,l,p,bpw,rel_error,seconds";

/// Runs the grid. Cells are independent jobs executed on a small thread
/// pool; rows come back in grid order regardless of completion order.
/// Cell failures (e.g. infeasible budgets) become NaN rows and a note on
/// the log stream when one is given.
std::vector<SweepRow> run_sweep(const std::vector<SweepInput>& inputs,
                                const SweepGrid& grid,
                                const SweepOptions& options,
                                std::ostream* log = nullptr);

/// Header line plus one line per row. NaN errors are spelled "NaN".
std::string render_csv(const std::vector<SweepRow>& rows);

}  // namespace mdbf

#endif  // MDBF_SWEEP_HPP_
