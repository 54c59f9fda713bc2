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

#include "mdbf/synth.hpp"

#include <algorithm>
#include <cmath>

namespace mdbf {

double Rng::uniform() {
  // 53-bit mantissa from the top bits of the engine output.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 == 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

int Rng::sign() { return (engine_() & 1u) ? 1 : -1; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "gaussian") {
    return SynthKind::kGaussian;
  }
  if (name == "heavytail") {
    return SynthKind::kHeavyTail;
  }
  if (name == "lowrank+noise") {
    return SynthKind::kLowRankNoise;
  }
  throw InvalidArgumentError("unknown synthetic matrix kind '" +
                             std::string(name) +
                             "' (expected gaussian, heavytail or "
                             "lowrank+noise)");
}

std::string synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kGaussian:
      return "gaussian";
    case SynthKind::kHeavyTail:
      return "heavytail";
    case SynthKind::kLowRankNoise:
      return "lowrank+noise";
  }
  return "?";
}

DenseMatrix synth_matrix(SynthKind kind, Index n, Index m,
                         std::uint64_t seed) {
  if (n < 1 || m < 1) {
    throw InvalidArgumentError("synth_matrix: dimensions must be positive");
  }
  Rng rng(seed);
  DenseMatrix w(n, m);
  switch (kind) {
    case SynthKind::kGaussian: {
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
          w(i, j) = rng.normal();
        }
      }
      break;
    }
    case SynthKind::kHeavyTail: {
      // Per-row magnitude spread mimics the wide scale distribution of
      // trained weight rows.
      for (Index i = 0; i < n; ++i) {
        const double scale = std::exp(rng.normal());
        for (Index j = 0; j < m; ++j) {
          w(i, j) = scale * rng.normal();
        }
      }
      break;
    }
    case SynthKind::kLowRankNoise: {
      const Index k = std::max<Index>(1, std::min(n, m) / 16);
      DenseMatrix u(n, k), v(m, k);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < k; ++j) {
          u(i, j) = rng.normal();
        }
      }
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < k; ++j) {
          v(i, j) = rng.normal();
        }
      }
      w = u * v.transpose();
      const double noise = 0.1 * w.norm() / std::sqrt(static_cast<double>(n * m));
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
          w(i, j) += noise * rng.normal();
        }
      }
      break;
    }
  }
  return w;
}

}  // namespace mdbf
