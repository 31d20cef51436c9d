// Copyright 2026 The qmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Single-outcome error and disturbance. Nothing here takes a preparation
 * state: every quantity is a property of one instrument outcome under a
 * uniform prior over the relevant eigenbasis.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qmeas/error.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/quasiprob.hpp"

namespace qmeas {

namespace tol {
inline constexpr double kNullOutcome = 1e-12;
inline constexpr double kZeroPosterior = 1e-12;
}  // namespace tol

struct RetrodictiveState {
  DensityOperator state;
  std::string source_outcome;
  double source_trace = 0.0;
};

/// X -> A_k(X) / Tr(P_k) for one outcome.
class InterdictiveState {
 public:
  InterdictiveState(const Instrument& inst, const std::string& label)
      : outcome_(label), kraus_(inst.outcome(label).operators) {
    normalizer_ = inst.pom()[inst.index_of(label)].matrix().trace().real();
    if (!(normalizer_ > tol::kNullOutcome)) {
      fail(ErrorKind::NullOutcome, "outcome '" + label + "' has Tr(P_k) = " + std::to_string(normalizer_));
    }
  }

  const std::string& outcome() const { return outcome_; }
  double normalizer() const { return normalizer_; }

  ComplexMatrix apply(const ComplexMatrix& x) const {
    ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
    for (const auto& m : kraus_) out += m * x * m.adjoint();
    return out / normalizer_;
  }

  ComplexMatrix adjoint(const ComplexMatrix& x) const {
    ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
    for (const auto& m : kraus_) out += m.adjoint() * x * m;
    return out / normalizer_;
  }

 private:
  std::string outcome_;
  std::vector<ComplexMatrix> kraus_;
  double normalizer_ = 0.0;
};

inline RetrodictiveState retrodictive_state(const Instrument& inst, const std::string& label) {
  const HermitianOperator& p = inst.pom()[inst.index_of(label)];
  const double tr = p.matrix().trace().real();
  if (!(tr > tol::kNullOutcome)) {
    fail(ErrorKind::NullOutcome, "outcome '" + label + "' never fires (Tr P_k = " + std::to_string(tr) + ")");
  }
  return {DensityOperator(ComplexMatrix(p.matrix() / tr)), label, tr};
}

/// Retrodictive standard deviation of A for outcome k.
inline double retrodictive_error(const Instrument& inst, const std::string& label, const HermitianOperator& a) {
  require_same_dim(inst.dim(), a.dim(), "retrodictive_error");
  return std::sqrt(expectation_and_variance(a, retrodictive_state(inst, label).state).variance);
}

/// Retrodictive commutator bound |<[A,B]>_k / 2i|.
inline double retrodictive_commutator_bound(const Instrument& inst, const std::string& label,
                                            const HermitianOperator& a, const HermitianOperator& b) {
  return commutator_bound(a, b, retrodictive_state(inst, label).state);
}

/// p(b, b' | k) = Tr[Pi_b' A_k(Pi_b)] / Tr(P_k); rows are preparations b,
/// columns post-selections b', both valued by the eigenvalues of B.
inline QuasiDistribution interdictive_joint_distribution(const Instrument& inst, const std::string& label,
                                                         const HermitianOperator& b) {
  require_same_dim(inst.dim(), b.dim(), "interdictive_joint_distribution");
  const InterdictiveState inter(inst, label);
  const SpectralDecomposition spec = spectral_decompose(b);
  QuasiDistribution d;
  d.row_labels = detail::branch_labels("b", spec.size());
  d.col_labels = detail::branch_labels("b'", spec.size());
  d.row_values = spec.eigenvalues();
  d.col_values = spec.eigenvalues();
  const auto n = static_cast<Eigen::Index>(spec.size());
  d.table.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ComplexMatrix evolved = inter.apply(spec.branches[static_cast<std::size_t>(i)].projector.matrix());
    for (Eigen::Index j = 0; j < n; ++j)
      d.table(i, j) = (spec.branches[static_cast<std::size_t>(j)].projector.matrix() * evolved).trace().real();
  }
  return d;
}

inline double interdictive_disturbance_sq(const Instrument& inst, const std::string& label,
                                          const HermitianOperator& b) {
  return std::max(0.0, quasi_mean_squared_difference(interdictive_joint_distribution(inst, label, b)));
}

/// Root-mean-squared deviation between bracketing preparations and
/// post-selections of B around outcome k.
inline double interdictive_disturbance(const Instrument& inst, const std::string& label,
                                       const HermitianOperator& b) {
  return std::sqrt(interdictive_disturbance_sq(inst, label, b));
}

/// Quantities conditioned on outcome k and posterior branch b' of B, under
/// rho_{k,b'} = A*_k(Pi_b') / Tr A*_k(Pi_b').
struct RestrictedMetrics {
  double p_posterior = 0.0;
  double eps_A_sq = 0.0;
  double eps_B_sq = 0.0;
  double eta_B_sq = 0.0;
  double retro_mean_B = 0.0;
  double retro_commutator_bound = 0.0;

  double eps_A() const { return std::sqrt(eps_A_sq); }
  double eps_B() const { return std::sqrt(eps_B_sq); }
  double eta_B() const { return std::sqrt(eta_B_sq); }
};

inline RestrictedMetrics restricted_metrics(const Instrument& inst, const std::string& label,
                                            std::size_t posterior_branch, const HermitianOperator& a,
                                            const HermitianOperator& b) {
  require_same_dim(inst.dim(), a.dim(), "restricted_metrics");
  require_same_dim(inst.dim(), b.dim(), "restricted_metrics");
  const InterdictiveState inter(inst, label);
  const SpectralDecomposition spec = spectral_decompose(b);
  if (posterior_branch >= spec.size()) {
    fail(ErrorKind::InvalidArgument, "posterior branch index out of range");
  }
  const ComplexMatrix weighted = inter.adjoint(spec.branches[posterior_branch].projector.matrix());
  RestrictedMetrics r;
  r.p_posterior = weighted.trace().real();
  if (!(r.p_posterior > tol::kZeroPosterior)) {
    fail(ErrorKind::ZeroPosterior, "posterior has probability " + std::to_string(r.p_posterior));
  }
  const DensityOperator conditioned(ComplexMatrix(weighted / r.p_posterior));
  r.eps_A_sq = expectation_and_variance(a, conditioned).variance;
  const Moments mb = expectation_and_variance(b, conditioned);
  r.eps_B_sq = mb.variance;
  r.retro_mean_B = mb.mean;
  r.retro_commutator_bound = commutator_bound(a, b, conditioned);

  const double posterior_value = spec.branches[posterior_branch].eigenvalue;
  double eta = 0.0;
  for (const auto& branch : spec.branches) {
    const double diff = branch.eigenvalue - posterior_value;
    eta += diff * diff * expectation(branch.projector, conditioned);
  }
  r.eta_B_sq = std::max(0.0, eta);
  return r;
}

}  // namespace qmeas
