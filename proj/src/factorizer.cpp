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

#include "mdbf/factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdbf {

namespace {

// Alternation stops once the best relative error has improved by less than
// this over kStallRounds consecutive rounds.
constexpr double kStallTol = 1e-7;
constexpr int kStallRounds = 25;

void validate_config(const FitConfig& cfg) {
  if (!(cfg.rho > 0.0)) {
    throw InvalidArgumentError("fit config: rho must be positive");
  }
  if (cfg.outer_iters < 0 || cfg.inner_admm_iters < 1 || cfg.grad_steps < 0) {
    throw InvalidArgumentError("fit config: bad iteration counts");
  }
  if (!(cfg.grad_lr > 0.0)) {
    throw InvalidArgumentError("fit config: learning rate must be positive");
  }
}

void validate_term_for(const DenseMatrix& w, const MdbfTerm& term) {
  if (term.n() != w.rows() || term.m() != w.cols()) {
    throw InvalidArgumentError("term shape does not match target matrix");
  }
  if (term.env_a.left.rows() != term.n() ||
      term.env_a.right.rows() != term.r() ||
      term.env_b.left.rows() != term.m() ||
      term.env_b.right.rows() != term.r() ||
      term.env_a.modes() != term.env_b.modes()) {
    throw InvalidArgumentError("inconsistent term factor shapes");
  }
}

MdbfTerm zero_envelope_copy(const MdbfTerm& term) {
  MdbfTerm out = term;
  out.env_a.left.setZero();
  out.env_a.right.setZero();
  out.env_b.left.setZero();
  out.env_b.right.setZero();
  return out;
}

}  // namespace

DenseMatrix MdbfTerm::factor_u() const {
  return s_a.cast<double>().cwiseProduct(env_a.product());
}

DenseMatrix MdbfTerm::factor_v() const {
  return s_b.cast<double>().cwiseProduct(env_b.product());
}

DenseMatrix reconstruct(const MdbfTerm& term) {
  return term.factor_u() * term.factor_v().transpose();
}

DenseMatrix reconstruct(const MdbfLayer& layer) {
  if (layer.terms.empty()) {
    throw InvalidArgumentError("reconstruct: layer has no terms");
  }
  DenseMatrix sum = DenseMatrix::Zero(layer.n(), layer.m());
  for (const MdbfTerm& term : layer.terms) {
    sum += reconstruct(term);
  }
  return sum;
}

std::pair<DenseMatrix, DenseMatrix> balanced_factors(const DenseMatrix& w,
                                                     Index rank) {
  const SvdResult svd = tsvd(w, rank);
  const Eigen::VectorXd scale = svd.singular_values.cwiseSqrt();
  return {svd.u * scale.asDiagonal(), svd.v * scale.asDiagonal()};
}

MdbfTerm init_mdbf(const DenseMatrix& w, Index rank, Index envelope_rank) {
  const Index kmax = std::min(w.rows(), w.cols());
  if (rank < 1 || rank > kmax) {
    throw InvalidArgumentError("init_mdbf: rank out of range");
  }
  if (envelope_rank < 1 || envelope_rank > std::min(kmax, rank)) {
    throw InvalidArgumentError("init_mdbf: envelope rank out of range");
  }
  auto [u0, v0] = balanced_factors(w, rank);
  const MsvidResult mu = msvid(u0, envelope_rank);
  const MsvidResult mv = msvid(v0, envelope_rank);
  MdbfTerm term;
  term.s_a = mu.mask;
  term.env_a = mu.envelope;
  term.s_b = mv.mask;
  term.env_b = mv.envelope;
  return term;
}

AdmmFactorResult admm_refine_factor(const DenseMatrix& target,
                                    const DenseMatrix& factor,
                                    const DenseMatrix& carrier,
                                    const DenseMatrix& lambda,
                                    const FitConfig& cfg,
                                    Index envelope_rank) {
  validate_config(cfg);
  if (target.rows() != factor.rows() || target.cols() != carrier.rows() ||
      factor.cols() != carrier.cols() || lambda.rows() != factor.rows() ||
      lambda.cols() != factor.cols()) {
    throw InvalidArgumentError("admm_refine_factor: shape mismatch");
  }

  // The penalty is cfg.rho times the mean diagonal of the Gram matrix, so
  // the update is equally damped regardless of the carrier's scale.
  Eigen::MatrixXd gram = carrier.transpose() * carrier;
  const double rho =
      cfg.rho * std::max(gram.trace() / static_cast<double>(gram.rows()),
                         1e-100);
  gram.diagonal().array() += rho;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const DenseMatrix wv = target * carrier;

  DenseMatrix u = factor;
  DenseMatrix dual = lambda;
  MsvidResult ms;
  for (int k = 0; k < cfg.inner_admm_iters; ++k) {
    const DenseMatrix rhs = wv + rho * (u - dual);
    const DenseMatrix u_tilde = llt.solve(rhs.transpose()).transpose();
    ms = msvid(u_tilde + dual, envelope_rank);
    u = ms.implied();
    dual += u_tilde - u;
    if (!u.allFinite() || !dual.allFinite()) {
      throw NumericalFailureError(
          "admm_refine_factor: non-finite iterate at inner iteration " +
          std::to_string(k + 1));
    }
  }
  return {std::move(ms.mask), std::move(ms.envelope), std::move(u),
          std::move(dual)};
}

MdbfTerm refine_term(const DenseMatrix& w, const MdbfTerm& term,
                     const FitConfig& cfg) {
  validate_config(cfg);
  validate_term_for(w, term);
  if (cfg.outer_iters == 0) {
    return term;
  }

  const double wnorm = w.norm();
  MdbfTerm current = term;
  DenseMatrix u = term.factor_u();
  DenseMatrix v = term.factor_v();
  const DenseMatrix wt = w.transpose();
  const DenseMatrix zero_dual_u = DenseMatrix::Zero(u.rows(), u.cols());
  const DenseMatrix zero_dual_v = DenseMatrix::Zero(v.rows(), v.cols());

  MdbfTerm best = term;
  double best_err = (w - u * v.transpose()).norm();

  double round_best = best_err;
  int stall = 0;
  for (int round = 0; round < cfg.outer_iters; ++round) {
    AdmmFactorResult ru =
        admm_refine_factor(w, u, v, zero_dual_u, cfg, term.l());
    u = std::move(ru.factor);
    current.s_a = std::move(ru.mask);
    current.env_a = std::move(ru.envelope);
    double err = (w - u * v.transpose()).norm();
    if (err < best_err) {
      best_err = err;
      best = current;
    }

    AdmmFactorResult rv =
        admm_refine_factor(wt, v, u, zero_dual_v, cfg, term.l());
    v = std::move(rv.factor);
    current.s_b = std::move(rv.mask);
    current.env_b = std::move(rv.envelope);
    err = (w - u * v.transpose()).norm();
    if (err < best_err) {
      best_err = err;
      best = current;
    }

    if (wnorm > 0.0 && (round_best - best_err) / wnorm < kStallTol) {
      if (++stall >= kStallRounds) {
        break;
      }
    } else {
      stall = 0;
    }
    round_best = best_err;
  }
  return best;
}

TermGradients reconstruction_gradients(const DenseMatrix& w,
                                       const MdbfTerm& term) {
  validate_term_for(w, term);
  const DenseMatrix sa = term.s_a.cast<double>();
  const DenseMatrix sb = term.s_b.cast<double>();
  const DenseMatrix fu = sa.cwiseProduct(term.env_a.product());
  const DenseMatrix fv = sb.cwiseProduct(term.env_b.product());
  const DenseMatrix resid = fu * fv.transpose() - w;

  const DenseMatrix du = sa.cwiseProduct(2.0 * (resid * fv));
  const DenseMatrix dv = sb.cwiseProduct(2.0 * (resid.transpose() * fu));
  TermGradients g;
  g.a = du * term.env_a.right;
  g.q = du.transpose() * term.env_a.left;
  g.b = dv * term.env_b.right;
  g.g = dv.transpose() * term.env_b.left;
  return g;
}

MdbfTerm gradient_refine(const DenseMatrix& w, const MdbfTerm& term,
                         const FitConfig& cfg) {
  validate_config(cfg);
  validate_term_for(w, term);
  if (cfg.grad_steps == 0) {
    return term;
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const DenseMatrix sa = term.s_a.cast<double>();
  const DenseMatrix sb = term.s_b.cast<double>();
  DenseMatrix a = term.env_a.left, q = term.env_a.right;
  DenseMatrix b = term.env_b.left, g = term.env_b.right;

  DenseMatrix ma = DenseMatrix::Zero(a.rows(), a.cols()), va = ma;
  DenseMatrix mq = DenseMatrix::Zero(q.rows(), q.cols()), vq = mq;
  DenseMatrix mb = DenseMatrix::Zero(b.rows(), b.cols()), vb = mb;
  DenseMatrix mg = DenseMatrix::Zero(g.rows(), g.cols()), vg = mg;

  MdbfTerm best = term;
  double best_err = (w - reconstruct(term)).norm();

  auto adam_step = [&](DenseMatrix& x, DenseMatrix& m1, DenseMatrix& m2,
                       const DenseMatrix& grad, int t) {
    m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
    m2.array() = kBeta2 * m2.array() + (1.0 - kBeta2) * grad.array().square();
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    x.array() -= cfg.grad_lr * (m1.array() / c1) /
                 ((m2.array() / c2).sqrt() + kEps);
  };

  for (int step = 1; step <= cfg.grad_steps; ++step) {
    const DenseMatrix fu = sa.cwiseProduct(a * q.transpose());
    const DenseMatrix fv = sb.cwiseProduct(b * g.transpose());
    const DenseMatrix resid = fu * fv.transpose() - w;
    if (!resid.allFinite()) {
      throw NumericalFailureError(
          "gradient_refine: non-finite loss at step " + std::to_string(step));
    }

    const DenseMatrix du = sa.cwiseProduct(2.0 * (resid * fv));
    const DenseMatrix dv = sb.cwiseProduct(2.0 * (resid.transpose() * fu));
    const DenseMatrix grad_a = du * q;
    const DenseMatrix grad_q = du.transpose() * a;
    const DenseMatrix grad_b = dv * g;
    const DenseMatrix grad_g = dv.transpose() * b;
    adam_step(a, ma, va, grad_a, step);
    adam_step(q, mq, vq, grad_q, step);
    adam_step(b, mb, vb, grad_b, step);
    adam_step(g, mg, vg, grad_g, step);

    const DenseMatrix fu2 = sa.cwiseProduct(a * q.transpose());
    const DenseMatrix fv2 = sb.cwiseProduct(b * g.transpose());
    const double err = (w - fu2 * fv2.transpose()).norm();
    if (err < best_err) {
      best_err = err;
      best.env_a.left = a;
      best.env_a.right = q;
      best.env_b.left = b;
      best.env_b.right = g;
    }
  }
  return best;
}

MdbfLayer fit_layer(const DenseMatrix& w, Index rank, Index envelope_rank,
                    Index depth, const FitConfig& cfg) {
  if (depth < 1) {
    throw InvalidArgumentError("fit_layer: depth must be at least 1");
  }
  validate_config(cfg);

  MdbfLayer layer;
  layer.terms.reserve(static_cast<std::size_t>(depth));
  DenseMatrix residual = w;
  for (Index k = 0; k < depth; ++k) {
    MdbfTerm term = init_mdbf(residual, rank, envelope_rank);
    term = refine_term(residual, term, cfg);
    if (cfg.grad_steps > 0) {
      term = gradient_refine(residual, term, cfg);
    }
    DenseMatrix recon = reconstruct(term);
    // A term that does not improve on adding nothing is dropped to zero so
    // stacked error stays nonincreasing in the term count.
    if ((residual - recon).norm() > residual.norm()) {
      term = zero_envelope_copy(term);
      recon.setZero();
    }
    residual -= recon;
    layer.terms.push_back(std::move(term));
  }
  return layer;
}

}  // namespace mdbf
