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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mdbf/container.hpp"
#include "mdbf/sweep.hpp"
#include "mdbf/synth.hpp"
#include "oracles.hpp"

using mdbf::DenseMatrix;
using mdbf::Index;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

CommandResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MDBF_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 512> buf{};
  CommandResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) {
    res.out += buf.data();
  }
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    lines.push_back(line);
  }
  return lines;
}

mdbf::FitConfig tiny_cfg() {
  mdbf::FitConfig cfg;
  cfg.outer_iters = 4;
  cfg.grad_steps = 5;
  return cfg;
}

// Positive rank-one matrix whose entries survive 32-bit file storage
// exactly: dyadic vector entries keep the products within 24 mantissa bits.
DenseMatrix dyadic_rank_one(mdbf::Rng& rng, Index n, Index m) {
  Eigen::VectorXd a(n), b(m);
  for (Index i = 0; i < n; ++i) {
    a(i) = static_cast<double>(rng.uniform_int(32, 256)) / 64.0;
  }
  for (Index j = 0; j < m; ++j) {
    b(j) = static_cast<double>(rng.uniform_int(32, 256)) / 64.0;
  }
  return a * b.transpose();
}

}  // namespace

TEST_CASE("run_sweep: grid order, NaN policy, determinism") {
  std::vector<mdbf::SweepInput> inputs;
  inputs.push_back(
      {"m0", mdbf::synth_matrix(mdbf::SynthKind::kGaussian, 16, 16, 3)});

  mdbf::SweepGrid grid;
  grid.bpw = {3.0};
  grid.l = {1, 2};
  grid.p = {1};
  mdbf::SweepOptions options;
  options.fit = tiny_cfg();
  options.zero_seconds = true;

  const std::vector<mdbf::SweepRow> rows =
      mdbf::run_sweep(inputs, grid, options, nullptr);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].l == 1);
  CHECK(rows[1].l == 2);
  // l=1 at 3 bpw on 16x16 is feasible; l=2 is not (floor is 4.75 bpw).
  CHECK(!std::isnan(rows[0].rel_error));
  CHECK(rows[0].r >= 1);
  CHECK(std::isnan(rows[1].rel_error));
  CHECK(rows[1].r == 0);

  const std::string csv = mdbf::render_csv(rows);
  const std::vector<std::string> lines = split_lines(csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "matrix_id,n,m,r,l,p,bpw,rel_error,seconds");
  CHECK(lines[2].find("NaN") != std::string::npos);
  CHECK(lines[2].find(",,") == std::string::npos);

  const std::string csv2 =
      mdbf::render_csv(mdbf::run_sweep(inputs, grid, options, nullptr));
  CHECK(csv == csv2);
}

TEST_CASE("run_sweep: parallel execution preserves grid order") {
  std::vector<mdbf::SweepInput> inputs;
  for (int i = 0; i < 3; ++i) {
    inputs.push_back({"m" + std::to_string(i),
                      mdbf::synth_matrix(mdbf::SynthKind::kHeavyTail, 12, 12,
                                         static_cast<std::uint64_t>(i))});
  }
  mdbf::SweepGrid grid;
  grid.bpw = {4.0, 6.0};
  grid.l = {1};
  grid.p = {1, 2};
  mdbf::SweepOptions serial;
  serial.fit = tiny_cfg();
  serial.zero_seconds = true;
  serial.jobs = 1;
  mdbf::SweepOptions parallel = serial;
  parallel.jobs = 4;

  const std::string a =
      mdbf::render_csv(mdbf::run_sweep(inputs, grid, serial, nullptr));
  const std::string b =
      mdbf::render_csv(mdbf::run_sweep(inputs, grid, parallel, nullptr));
  CHECK(a == b);
}

TEST_CASE("cli: budget prints the chosen rank") {
  const CommandResult res =
      run_cli("budget --n 1024 --m 1024 --l 1 --p 1 --real-bits 16 --bpw 1.5");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("R=740") != std::string::npos);

  const CommandResult infeasible =
      run_cli("budget --n 64 --m 64 --l 4 --p 1 --real-bits 16 --bpw 0.5");
  CHECK(infeasible.exit_code == 2);
}

TEST_CASE("cli: factorize argument and file errors") {
  CHECK(run_cli("factorize /tmp/no_such_input_file.rtf /tmp/out.mdbf --rank 2")
            .exit_code == 3);
  CHECK(run_cli("factorize --synth gaussian --n 8 --m 8 /tmp/out.mdbf "
                "--rank 2 --bpw 1.5")
            .exit_code == 2);
  CHECK(run_cli("factorize --synth gaussian --n 8 --m 8 /tmp/out.mdbf")
            .exit_code == 2);
}

TEST_CASE("cli: positive rank-one input factorizes exactly") {
  mdbf::Rng rng(91);
  const DenseMatrix w = dyadic_rank_one(rng, 12, 9);
  mdbf::save_dense("/tmp/mdbf_cli_rank1.rtf", w);
  const CommandResult res = run_cli(
      "factorize /tmp/mdbf_cli_rank1.rtf /tmp/mdbf_cli_rank1.mdbf --rank 1 "
      "--l 1 --p 1 --outer 2 --grad-steps 0");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("R=1") != std::string::npos);

  const std::size_t at = res.out.find("rel_error=");
  REQUIRE(at != std::string::npos);
  const double err = std::stod(res.out.substr(at + 10));
  CHECK(err <= 1e-8);
}

TEST_CASE("cli: factorize summary is consistent with the container") {
  mdbf::Rng rng(92);
  DenseMatrix w = mdbf_tests::random_matrix(rng, 20, 14);
  mdbf::save_dense("/tmp/mdbf_cli_w.rtf", w);
  w = mdbf::load_dense("/tmp/mdbf_cli_w.rtf");

  const CommandResult res = run_cli(
      "factorize /tmp/mdbf_cli_w.rtf /tmp/mdbf_cli_w.mdbf --rank 6 --l 2 "
      "--p 1 --real-bits 32 --outer 6 --grad-steps 10");
  CHECK(res.exit_code == 0);
  const std::size_t at = res.out.find("rel_error=");
  REQUIRE(at != std::string::npos);
  const double reported = std::stod(res.out.substr(at + 10));

  // Re-derive the summary error from the written container.
  const mdbf::MdbfLayer layer = mdbf::load_layer("/tmp/mdbf_cli_w.mdbf");
  const double rederived =
      mdbf::rel_frobenius_error(w, mdbf::reconstruct(layer));
  CHECK(std::abs(reported - rederived) <= 1e-5);
}

TEST_CASE("cli: lossless configuration round trips through files") {
  mdbf::Rng rng(93);
  DenseMatrix w = mdbf_tests::random_matrix(rng, 10, 10);
  mdbf::save_dense("/tmp/mdbf_cli_full.rtf", w);
  w = mdbf::load_dense("/tmp/mdbf_cli_full.rtf");

  CHECK(run_cli("factorize /tmp/mdbf_cli_full.rtf /tmp/mdbf_cli_full.mdbf "
                "--rank 10 --l 10 --p 1 --real-bits 32 --outer 0 "
                "--grad-steps 0")
            .exit_code == 0);
  CHECK(run_cli("reconstruct /tmp/mdbf_cli_full.mdbf /tmp/mdbf_cli_rec.rtf")
            .exit_code == 0);
  const DenseMatrix rec = mdbf::load_dense("/tmp/mdbf_cli_rec.rtf");
  CHECK(mdbf::rel_frobenius_error(w, rec) <= 1e-6);

  // Identity activations give the reconstruction back.
  mdbf::save_dense("/tmp/mdbf_cli_eye.rtf", DenseMatrix::Identity(10, 10));
  CHECK(run_cli("forward /tmp/mdbf_cli_full.mdbf /tmp/mdbf_cli_eye.rtf "
                "/tmp/mdbf_cli_fwd.rtf")
            .exit_code == 0);
  const DenseMatrix fwd = mdbf::load_dense("/tmp/mdbf_cli_fwd.rtf");
  CHECK((fwd - rec).norm() <= 1e-6 * std::max(1.0, rec.norm()));

  CHECK(run_cli("reconstruct /tmp/mdbf_cli_eye.rtf /tmp/x.rtf").exit_code ==
        3);
}

TEST_CASE("cli: erank on reference matrices") {
  mdbf::save_dense("/tmp/mdbf_cli_id8.rtf", DenseMatrix::Identity(8, 8));
  const CommandResult id8 = run_cli("erank /tmp/mdbf_cli_id8.rtf --rank 8");
  CHECK(id8.exit_code == 0);
  CHECK(id8.out.find("erank(W)       = 8.000000") != std::string::npos);

  mdbf::Rng rng(94);
  mdbf::save_dense("/tmp/mdbf_cli_r1.rtf", dyadic_rank_one(rng, 12, 12));
  const CommandResult r1 = run_cli("erank /tmp/mdbf_cli_r1.rtf --rank 4");
  CHECK(r1.exit_code == 0);
  CHECK(r1.out.find("erank(|U0|)    = 1.000000") != std::string::npos);

  CHECK(run_cli("erank /tmp/mdbf_cli_id8.rtf --rank 9").exit_code == 2);
}

TEST_CASE("cli: seeded sweeps emit byte-identical CSV") {
  const std::string args =
      "sweep --synth gaussian --n 20 --m 20 --count 2 --bpw 4,6 --l 1,2 "
      "--p 1 --outer 2 --grad-steps 0 --seed 3 --csv ";
  CHECK(run_cli(args + "/tmp/mdbf_sweep_a.csv").exit_code == 0);
  CHECK(run_cli(args + "/tmp/mdbf_sweep_b.csv").exit_code == 0);
  const std::string a = read_file("/tmp/mdbf_sweep_a.csv");
  const std::string b = read_file("/tmp/mdbf_sweep_b.csv");
  CHECK(a == b);

  const std::vector<std::string> lines = split_lines(a);
  REQUIRE(lines.size() == 1 + 2 * 2 * 2);
  CHECK(lines[0] == "matrix_id,n,m,r,l,p,bpw,rel_error,seconds");
}
