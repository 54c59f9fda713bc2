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

#include "mdbf/linalg.hpp"

#include <algorithm>
#include <string>

namespace mdbf {

DenseMatrix SvdResult::reconstruct() const {
  return u * singular_values.asDiagonal() * v.transpose();
}

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + ": non-finite entries");
  }
}

SvdResult tsvd(const DenseMatrix& m, Index k) {
  require_finite(m, "tsvd");
  const Index kmax = std::min(m.rows(), m.cols());
  if (k < 1 || k > kmax) {
    throw InvalidArgumentError("tsvd: k=" + std::to_string(k) +
                               " out of range [1, " + std::to_string(kmax) +
                               "]");
  }
  // Divide-and-conquer bidiagonalization; falls back to Jacobi for small
  // blocks. Deterministic for a fixed input.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalFailureError(
        "tsvd: SVD did not converge within the backend iteration limit on a " +
        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix");
  }
  SvdResult out;
  out.u = svd.matrixU().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  out.v = svd.matrixV().leftCols(k);
  return out;
}

DenseMatrix sign_of(const DenseMatrix& m) {
  require_finite(m, "sign_of");
  DenseMatrix s(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      s(i, j) = m(i, j) < 0.0 ? -1.0 : 1.0;
    }
  }
  return s;
}

double rel_frobenius_error(const DenseMatrix& w, const DenseMatrix& what) {
  if (w.rows() != what.rows() || w.cols() != what.cols()) {
    throw InvalidArgumentError("rel_frobenius_error: shape mismatch");
  }
  const double wnorm = w.norm();
  if (wnorm == 0.0) {
    throw InvalidInputError("rel_frobenius_error: reference matrix has zero norm");
  }
  return (w - what).norm() / wnorm;
}

}  // namespace mdbf
