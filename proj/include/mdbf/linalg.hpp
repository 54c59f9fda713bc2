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

#ifndef MDBF_LINALG_HPP_
#define MDBF_LINALG_HPP_

#include <Eigen/Dense>

#include "mdbf/errors.hpp"

namespace mdbf {

using Index = Eigen::Index;

/// Row-major double matrix. All numerics run at 64-bit precision; storage
/// width is a container concern.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Top-k singular triplets of a matrix. Columns of u and v are orthonormal,
/// singular values are sorted nonincreasing.
struct SvdResult {
  DenseMatrix u;                    // n x k
  Eigen::VectorXd singular_values;  // length k
  DenseMatrix v;                    // m x k

  /// Materializes u * diag(singular_values) * v^T.
  DenseMatrix reconstruct() const;
};

/// Throws InvalidInputError if any entry of m is NaN or infinite.
void require_finite(const DenseMatrix& m, const char* what);

/// Rank-k truncated SVD. Deterministic for a fixed input. The truncation
/// is the best rank-k Frobenius approximation of m.
SvdResult tsvd(const DenseMatrix& m, Index k);

/// Entrywise sign with sign(0) = +1. Output entries are exactly -1 or +1.
DenseMatrix sign_of(const DenseMatrix& m);

/// ||w - what||_F / ||w||_F. Requires matching shapes and ||w||_F > 0.
double rel_frobenius_error(const DenseMatrix& w, const DenseMatrix& what);

}  // namespace mdbf

#endif  // MDBF_LINALG_HPP_
