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

#ifndef MDBF_ENVELOPE_HPP_
#define MDBF_ENVELOPE_HPP_

#include <cstdint>

#include "mdbf/linalg.hpp"

namespace mdbf {

/// Dense +-1 matrix. Every entry is exactly -1 or +1.
using SignMatrix =
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rank-l factorization of a magnitude envelope: the envelope matrix is
/// left * right^T, so its rank is at most modes() by construction.
struct EnvelopeFactor {
  DenseMatrix left;   // n x l
  DenseMatrix right;  // k x l

  Index modes() const { return left.cols(); }
  DenseMatrix product() const { return left * right.transpose(); }
};

/// Sign carrier of a real matrix, with sign(0) = +1.
SignMatrix sign_mask(const DenseMatrix& z);

/// Entrywise product s .* z. Self-inverse: applying the same mask twice
/// recovers z exactly, since every mask entry squares to 1.
DenseMatrix demodulate(const SignMatrix& s, const DenseMatrix& z);

/// Sign mask plus rank-l envelope of a matrix: mask = sign(z) and the
/// envelope factors a rank-l truncation of |z|. The matrix the pair stands
/// for is mask .* (left * right^T).
struct MsvidResult {
  SignMatrix mask;
  EnvelopeFactor envelope;

  DenseMatrix implied() const;
};

MsvidResult msvid(const DenseMatrix& z, Index l);

/// Frobenius projection of z onto the set of matrices whose demodulated
/// envelope under s has rank <= l. Recomputes the truncated SVD on every
/// call; callers needing repeated projections should cache their own
/// factorization.
DenseMatrix project_fl(const SignMatrix& s, const DenseMatrix& z, Index l);

/// The optimal Frobenius error attainable when approximating u with a
/// fixed mask s and an envelope of rank <= l: the root tail energy of the
/// singular spectrum of s .* u past index l.
double optimal_fixed_mask_error(const SignMatrix& s, const DenseMatrix& u,
                                Index l);

/// Entropy effective rank: exp of the Shannon entropy of the normalized
/// singular spectrum, with 0*log 0 = 0. A zero matrix is treated as having
/// a flat spectrum and reports min(rows, cols). Scale-invariant; equals 1
/// for nonzero rank-one matrices.
double effective_rank(const DenseMatrix& e);

}  // namespace mdbf

#endif  // MDBF_ENVELOPE_HPP_
