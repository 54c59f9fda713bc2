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

#ifndef MDBF_FACTORIZER_HPP_
#define MDBF_FACTORIZER_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "mdbf/envelope.hpp"
#include "mdbf/linalg.hpp"

namespace mdbf {

/// One factorization term. The left factor is s_a .* (A Q^T) (n x r) and
/// the right factor is s_b .* (B G^T) (m x r); the term stands for their
/// product. Both demodulated envelopes have rank <= l by construction.
struct MdbfTerm {
  SignMatrix s_a;        // n x r
  EnvelopeFactor env_a;  // A: n x l, Q: r x l
  SignMatrix s_b;        // m x r
  EnvelopeFactor env_b;  // B: m x l, G: r x l

  Index n() const { return s_a.rows(); }
  Index m() const { return s_b.rows(); }
  Index r() const { return s_a.cols(); }
  Index l() const { return env_a.modes(); }

  /// s_a .* (A Q^T), materialized.
  DenseMatrix factor_u() const;
  /// s_b .* (B G^T), materialized.
  DenseMatrix factor_v() const;
};

/// Ordered stack of terms sharing (n, m); the layer stands for the sum of
/// its term reconstructions.
struct MdbfLayer {
  std::vector<MdbfTerm> terms;

  Index depth() const { return static_cast<Index>(terms.size()); }
  Index n() const { return terms.front().n(); }
  Index m() const { return terms.front().m(); }
};

/// Optimization hyperparameters. Defaults correspond to full-quality runs;
/// desk-scale tests override with smaller budgets.
struct FitConfig {
  double rho = 1.0;          // quadratic penalty of the alternating solver
  int outer_iters = 1000;    // alternating rounds (each updates both sides)
  int inner_admm_iters = 3;  // inner updates per side per round
  int grad_steps = 1500;     // Adam polish steps on the real factors
  double grad_lr = 0.01;
  std::uint64_t seed = 0;    // reserved for callers; the fit itself is
                             // deterministic and draws no random numbers
};

DenseMatrix reconstruct(const MdbfTerm& term);
DenseMatrix reconstruct(const MdbfLayer& layer);

/// Splits the rank-R truncated SVD of w into factors of equal column
/// norms: U0 = U sqrt(S), V0 = V sqrt(S), so U0 V0^T is the best rank-R
/// approximation and ||col_j U0|| = ||col_j V0|| = sqrt(sigma_j).
std::pair<DenseMatrix, DenseMatrix> balanced_factors(const DenseMatrix& w,
                                                     Index rank);

/// Closed-form initializer: balanced factors of w, each replaced by its
/// sign mask and rank-l envelope truncation.
MdbfTerm init_mdbf(const DenseMatrix& w, Index rank, Index envelope_rank);

/// Output of one inner-iteration block refining a single factor.
struct AdmmFactorResult {
  SignMatrix mask;
  EnvelopeFactor envelope;
  DenseMatrix factor;  // mask .* envelope product, materialized
  DenseMatrix lambda;  // scaled dual after the final inner iteration
};

/// Runs cfg.inner_admm_iters updates of the penalized least-squares /
/// envelope-truncation / dual ascent cycle for the factor, holding the
/// carrier fixed: the objective is ||target - factor * carrier^T||_F.
/// The effective penalty is cfg.rho scaled by the mean diagonal of
/// carrier^T carrier, keeping the damping invariant to the carrier's
/// magnitude. The linear solve factorizes the shifted Gram matrix
/// (positive definite for rho > 0); no explicit inverse is formed.
AdmmFactorResult admm_refine_factor(const DenseMatrix& target,
                                    const DenseMatrix& factor,
                                    const DenseMatrix& carrier,
                                    const DenseMatrix& lambda,
                                    const FitConfig& cfg, Index envelope_rank);

/// Alternates factor updates (left side, then right side on the transposed
/// problem) for cfg.outer_iters rounds. The scheme is heuristic, so the
/// lowest-error iterate seen is tracked and returned; the result never has
/// a larger reconstruction error than the input term.
MdbfTerm refine_term(const DenseMatrix& w, const MdbfTerm& term,
                     const FitConfig& cfg);

/// Gradients of ||w - reconstruct(term)||_F^2 with respect to the real
/// factors A, Q, B, G, with the sign carriers held fixed.
struct TermGradients {
  DenseMatrix a, q, b, g;
};
TermGradients reconstruction_gradients(const DenseMatrix& w,
                                       const MdbfTerm& term);

/// Adam descent on the real factors only (signs frozen), minimizing the
/// squared reconstruction loss. Best iterate returned.
MdbfTerm gradient_refine(const DenseMatrix& w, const MdbfTerm& term,
                         const FitConfig& cfg);

/// Stagewise residual fitting: term k is fitted (init + refine + optional
/// gradient polish) against w minus the reconstructions of terms 1..k-1.
/// The stacked reconstruction error is nonincreasing in the term count.
MdbfLayer fit_layer(const DenseMatrix& w, Index rank, Index envelope_rank,
                    Index depth, const FitConfig& cfg);

}  // namespace mdbf

#endif  // MDBF_FACTORIZER_HPP_
