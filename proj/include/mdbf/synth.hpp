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

#ifndef MDBF_SYNTH_HPP_
#define MDBF_SYNTH_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "mdbf/linalg.hpp"

namespace mdbf {

/// Deterministic random source. Normal deviates use an explicit
/// Box-Muller transform so streams do not depend on the standard
/// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal deviate.
  double normal();
  /// Uniformly -1 or +1.
  int sign();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

enum class SynthKind {
  kGaussian,       // i.i.d. standard normal entries
  kHeavyTail,      // Gaussian rows scaled by log-normal(0,1) draws
  kLowRankNoise,   // low-rank Gaussian product plus small dense noise
};

/// Parses "gaussian" | "heavytail" | "lowrank+noise".
SynthKind parse_synth_kind(std::string_view name);
std::string synth_kind_name(SynthKind kind);

DenseMatrix synth_matrix(SynthKind kind, Index n, Index m, std::uint64_t seed);

}  // namespace mdbf

#endif  // MDBF_SYNTH_HPP_
