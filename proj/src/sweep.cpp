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

#include "mdbf/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "mdbf/budget.hpp"

namespace mdbf {

namespace {

struct Cell {
  const SweepInput* input = nullptr;
  double target_bpw = 0.0;
  Index l = 0;
  Index p = 0;
};

// Fits one cell; never throws. Failures are encoded in the row.
SweepRow run_cell(const Cell& cell, const SweepOptions& options,
                  std::string* note) {
  SweepRow row;
  row.matrix_id = cell.input->id;
  row.n = cell.input->w.rows();
  row.m = cell.input->w.cols();
  row.l = cell.l;
  row.p = cell.p;
  row.bpw = cell.target_bpw;
  row.rel_error = std::numeric_limits<double>::quiet_NaN();

  const auto start = std::chrono::steady_clock::now();
  try {
    BudgetSpec spec;
    spec.n = row.n;
    spec.m = row.m;
    spec.l = cell.l;
    spec.p = cell.p;
    spec.real_bits = options.real_bits;
    spec.target_bpw = cell.target_bpw;
    const Index rank = max_rank(spec);
    const MdbfLayer layer =
        fit_layer(cell.input->w, rank, cell.l, cell.p, options.fit);
    row.r = rank;
    row.rel_error = rel_frobenius_error(cell.input->w, reconstruct(layer));
  } catch (const Error& e) {
    *note = cell.input->id + " bpw=" + std::to_string(cell.target_bpw) +
            " l=" + std::to_string(cell.l) + " p=" + std::to_string(cell.p) +
            ": " + e.what();
  }
  const auto stop = std::chrono::steady_clock::now();
  row.seconds =
      options.zero_seconds
          ? 0.0
          : std::chrono::duration<double>(stop - start).count();
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const std::vector<SweepInput>& inputs,
                                const SweepGrid& grid,
                                const SweepOptions& options,
                                std::ostream* log) {
  if (inputs.empty() || grid.bpw.empty() || grid.l.empty() || grid.p.empty()) {
    throw InvalidArgumentError("run_sweep: empty inputs or grid axes");
  }

  std::vector<Cell> cells;
  for (const SweepInput& input : inputs) {
    for (const double bpw : grid.bpw) {
      for (const Index l : grid.l) {
        for (const Index p : grid.p) {
          cells.push_back({&input, bpw, l, p});
        }
      }
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::string> notes(cells.size());
  std::atomic<std::size_t> next{0};
  unsigned jobs = options.jobs > 0
                      ? static_cast<unsigned>(options.jobs)
                      : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) {
        return;
      }
      rows[i] = run_cell(cells[i], options, &notes[i]);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned i = 0; i < jobs; ++i) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }

  if (log != nullptr) {
    for (const std::string& note : notes) {
      if (!note.empty()) {
        *log << "sweep: cell failed: " << note << "\n";
      }
    }
  }
  return rows;
}

std::string render_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepCsvHeader;
  out += "\n";
  char buf[128];
  for (const SweepRow& row : rows) {
    std::string err;
    if (std::isnan(row.rel_error)) {
      err = "NaN";
    } else {
      std::snprintf(buf, sizeof(buf), "%.9g", row.rel_error);
      err = buf;
    }
    out += row.matrix_id;
    std::snprintf(buf, sizeof(buf), ",%lld,%lld,%lld,%lld,%lld,%.6g,",
                  static_cast<long long>(row.n), static_cast<long long>(row.m),
                  static_cast<long long>(row.r), static_cast<long long>(row.l),
                  static_cast<long long>(row.p), row.bpw);
    out += buf;
    out += err;
    std::snprintf(buf, sizeof(buf), ",%.3f", row.seconds);
    out += buf;
    out += "\n";
  }
  return out;
}

}  // namespace mdbf
