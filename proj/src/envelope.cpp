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

#include "mdbf/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdbf {

namespace {

void require_same_shape(const SignMatrix& s, const DenseMatrix& z,
                        const char* what) {
  if (s.rows() != z.rows() || s.cols() != z.cols()) {
    throw InvalidArgumentError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

SignMatrix sign_mask(const DenseMatrix& z) {
  require_finite(z, "sign_mask");
  SignMatrix s(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) {
      s(i, j) = z(i, j) < 0.0 ? static_cast<std::int8_t>(-1)
                              : static_cast<std::int8_t>(1);
    }
  }
  return s;
}

DenseMatrix demodulate(const SignMatrix& s, const DenseMatrix& z) {
  require_same_shape(s, z, "demodulate");
  return s.cast<double>().cwiseProduct(z);
}

DenseMatrix MsvidResult::implied() const {
  return mask.cast<double>().cwiseProduct(envelope.product());
}

MsvidResult msvid(const DenseMatrix& z, Index l) {
  const Index kmax = std::min(z.rows(), z.cols());
  if (l < 1 || l > kmax) {
    throw InvalidArgumentError("msvid: l=" + std::to_string(l) +
                               " out of range [1, " + std::to_string(kmax) +
                               "]");
  }
  MsvidResult out;
  out.mask = sign_mask(z);
  const SvdResult svd = tsvd(z.cwiseAbs(), l);
  // Balanced split of the truncated envelope: both sides carry sqrt(sigma).
  const Eigen::VectorXd scale = svd.singular_values.cwiseSqrt();
  out.envelope.left = svd.u * scale.asDiagonal();
  out.envelope.right = svd.v * scale.asDiagonal();
  return out;
}

DenseMatrix project_fl(const SignMatrix& s, const DenseMatrix& z, Index l) {
  require_same_shape(s, z, "project_fl");
  const DenseMatrix env = demodulate(s, z);
  const SvdResult svd = tsvd(env, l);
  return demodulate(s, svd.reconstruct());
}

double optimal_fixed_mask_error(const SignMatrix& s, const DenseMatrix& u,
                                Index l) {
  require_same_shape(s, u, "optimal_fixed_mask_error");
  const Index kmax = std::min(u.rows(), u.cols());
  if (l < 1 || l > kmax) {
    throw InvalidArgumentError("optimal_fixed_mask_error: l out of range");
  }
  const SvdResult svd = tsvd(demodulate(s, u), kmax);
  // Back-to-front summation keeps the tail sums exactly nested in l.
  double tail = 0.0;
  for (Index i = kmax - 1; i >= l; --i) {
    const double sv = svd.singular_values(i);
    tail += sv * sv;
  }
  return std::sqrt(tail);
}

double effective_rank(const DenseMatrix& e) {
  require_finite(e, "effective_rank");
  const Index kmax = std::min(e.rows(), e.cols());
  const SvdResult svd = tsvd(e, kmax);
  const double total = svd.singular_values.sum();
  if (total == 0.0) {
    // Flat-spectrum convention for the zero matrix.
    return static_cast<double>(kmax);
  }
  double entropy = 0.0;
  for (Index i = 0; i < kmax; ++i) {
    const double p = svd.singular_values(i) / total;
    if (p > 0.0) {
      entropy -= p * std::log(p);
    }
  }
  return std::exp(entropy);
}

}  // namespace mdbf
