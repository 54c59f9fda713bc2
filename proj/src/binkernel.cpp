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

#include "mdbf/binkernel.hpp"

#include <algorithm>

namespace mdbf {

namespace {

thread_local std::uint64_t g_matmul_count = 0;

constexpr Index kWordBits = 64;

}  // namespace

std::uint64_t packed_matmul_count() { return g_matmul_count; }

void reset_packed_matmul_count() { g_matmul_count = 0; }

PackedSigns pack(const SignMatrix& s) {
  PackedSigns p;
  p.rows = s.rows();
  p.cols = s.cols();
  p.words_per_row = (s.cols() + kWordBits - 1) / kWordBits;
  p.words.assign(static_cast<std::size_t>(p.rows * p.words_per_row), 0u);
  for (Index i = 0; i < s.rows(); ++i) {
    std::uint64_t* row = p.words.data() + i * p.words_per_row;
    for (Index j = 0; j < s.cols(); ++j) {
      if (s(i, j) > 0) {
        row[j / kWordBits] |= std::uint64_t{1} << (j % kWordBits);
      }
    }
  }
  return p;
}

SignMatrix unpack(const PackedSigns& p) {
  SignMatrix s(p.rows, p.cols);
  for (Index i = 0; i < p.rows; ++i) {
    const std::uint64_t* row = p.words.data() + i * p.words_per_row;
    for (Index j = 0; j < p.cols; ++j) {
      const bool plus = (row[j / kWordBits] >> (j % kWordBits)) & 1u;
      s(i, j) = plus ? static_cast<std::int8_t>(1)
                     : static_cast<std::int8_t>(-1);
    }
  }
  return s;
}

DenseMatrix signed_matmul(const DenseMatrix& x, const PackedSigns& s) {
  if (x.cols() != s.rows) {
    throw InvalidArgumentError("signed_matmul: inner dimension mismatch");
  }
  ++g_matmul_count;
  DenseMatrix y = DenseMatrix::Zero(x.rows(), s.cols);
  for (Index t = 0; t < x.rows(); ++t) {
    double* yrow = y.data() + t * s.cols;
    for (Index n = 0; n < s.rows; ++n) {
      const double v = x(t, n);
      const std::uint64_t* wrow = s.words.data() + n * s.words_per_row;
      for (Index w = 0; w < s.words_per_row; ++w) {
        std::uint64_t bits = wrow[w];
        const Index base = w * kWordBits;
        const Index limit = std::min<Index>(kWordBits, s.cols - base);
        for (Index j = 0; j < limit; ++j) {
          yrow[base + j] += (bits & 1u) ? v : -v;
          bits >>= 1;
        }
      }
    }
  }
  return y;
}

DenseMatrix signed_matmul_transposed(const DenseMatrix& x,
                                     const PackedSigns& s) {
  if (x.cols() != s.cols) {
    throw InvalidArgumentError(
        "signed_matmul_transposed: inner dimension mismatch");
  }
  ++g_matmul_count;
  DenseMatrix y = DenseMatrix::Zero(x.rows(), s.rows);
  for (Index t = 0; t < x.rows(); ++t) {
    const double* xrow = x.data() + t * s.cols;
    for (Index m = 0; m < s.rows; ++m) {
      const std::uint64_t* wrow = s.words.data() + m * s.words_per_row;
      double acc = 0.0;
      for (Index w = 0; w < s.words_per_row; ++w) {
        std::uint64_t bits = wrow[w];
        const Index base = w * kWordBits;
        const Index limit = std::min<Index>(kWordBits, s.cols - base);
        for (Index j = 0; j < limit; ++j) {
          acc += (bits & 1u) ? xrow[base + j] : -xrow[base + j];
          bits >>= 1;
        }
      }
      y(t, m) = acc;
    }
  }
  return y;
}

DenseMatrix term_forward(const DenseMatrix& x, const MdbfTerm& term) {
  if (x.cols() != term.n()) {
    throw InvalidArgumentError("term_forward: activation width mismatch");
  }
  const PackedSigns pa = pack(term.s_a);
  const PackedSigns pb = pack(term.s_b);
  const Index modes = term.l();

  DenseMatrix h = DenseMatrix::Zero(x.rows(), term.r());
  for (Index t = 0; t < modes; ++t) {
    const DenseMatrix xs =
        x * term.env_a.left.col(t).asDiagonal();
    h += signed_matmul(xs, pa) * term.env_a.right.col(t).asDiagonal();
  }
  DenseMatrix y = DenseMatrix::Zero(x.rows(), term.m());
  for (Index t = 0; t < modes; ++t) {
    const DenseMatrix hs = h * term.env_b.right.col(t).asDiagonal();
    y += signed_matmul_transposed(hs, pb) *
         term.env_b.left.col(t).asDiagonal();
  }
  return y;
}

DenseMatrix layer_forward(const DenseMatrix& x, const MdbfLayer& layer) {
  if (layer.terms.empty()) {
    throw InvalidArgumentError("layer_forward: layer has no terms");
  }
  DenseMatrix y = DenseMatrix::Zero(x.rows(), layer.m());
  for (const MdbfTerm& term : layer.terms) {
    y += term_forward(x, term);
  }
  return y;
}

}  // namespace mdbf
