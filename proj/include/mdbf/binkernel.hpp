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

#ifndef MDBF_BINKERNEL_HPP_
#define MDBF_BINKERNEL_HPP_

#include <cstdint>
#include <vector>

#include "mdbf/factorizer.hpp"

namespace mdbf {

/// Bit-packed sign matrix. One bit per entry, row-major, bit = 1 iff the
/// entry is +1, least-significant-bit first within each 64-bit word. Each
/// row is padded to a whole number of words; padding bits are zero.
struct PackedSigns {
  Index rows = 0;
  Index cols = 0;
  Index words_per_row = 0;
  std::vector<std::uint64_t> words;  // rows * words_per_row
};

PackedSigns pack(const SignMatrix& s);
SignMatrix unpack(const PackedSigns& p);

/// x * S for a packed sign matrix S (x.cols() == S.rows). Accumulation in
/// 64-bit floats.
DenseMatrix signed_matmul(const DenseMatrix& x, const PackedSigns& s);

/// x * S^T for a packed sign matrix S (x.cols() == S.cols).
DenseMatrix signed_matmul_transposed(const DenseMatrix& x,
                                     const PackedSigns& s);

/// Deployment-style forward pass through one term: per envelope mode, a
/// column rescale of the activations, one packed sign matmul over the
/// shared carrier and another rescale; 2l packed matmuls total. Matches
/// x * reconstruct(term).
DenseMatrix term_forward(const DenseMatrix& x, const MdbfTerm& term);

/// Sum of term_forward over the layer's terms.
DenseMatrix layer_forward(const DenseMatrix& x, const MdbfLayer& layer);

/// Number of packed sign matmuls executed by the calling thread since the
/// last reset. Instrumentation for kernel-schedule checks.
std::uint64_t packed_matmul_count();
void reset_packed_matmul_count();

}  // namespace mdbf

#endif  // MDBF_BINKERNEL_HPP_
