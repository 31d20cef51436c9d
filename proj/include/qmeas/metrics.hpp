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
 * Operator-based mean-squared error and disturbance of an indirect
 * measurement, in the joint system-detector picture and the reduced system
 * picture, together with their first moments, the unbiased and QND
 * predicates, and the Lindblad decomposition of the back-action.
 *
 * For an unbiased apparatus the noise second moment collapses to the
 * excess of the measured second moment over the ideal one. With the
 * two-outcome qubit POM (I +- cos(theta) sigma_z)/2 and values
 * +-1/cos(theta) this is sec^2(theta) - 1 = tan^2(theta) for every state.
 */

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmeas/error.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/operator.hpp"

namespace qmeas {

namespace tol {
inline constexpr double kSecondMomentClip = 1e-9;
inline constexpr double kUnbiased = 1e-8;
inline constexpr double kQnd = 1e-9;
inline constexpr double kDispersionAgreement = 1e-9;
}  // namespace tol

enum class Picture { joint, system, quasi };

inline const char* to_string(Picture p) {
  switch (p) {
    case Picture::joint: return "joint";
    case Picture::system: return "system";
    case Picture::quasi: return "quasi";
  }
  return "?";
}

/// value = first_term + second_term - cross_term, where cross_term is the
/// doubled Jordan-product expectation.
struct NoiseReport {
  double delta = 0.0;
  double value = 0.0;
  Picture picture = Picture::system;
  double first_term = 0.0;
  double second_term = 0.0;
  double cross_term = 0.0;
};

/// Second moments of Hermitian differences are nonnegative; round-off down
/// to -1e-9 is clipped, anything lower is a numeric failure.
inline double clip_second_moment(double v, const char* what) {
  if (v >= 0.0) return v;
  if (v >= -tol::kSecondMomentClip) return 0.0;
  fail(ErrorKind::InternalNumeric, std::string(what) + " is negative: " + std::to_string(v));
}

inline double delta_A(const Instrument& inst, const ValueAssignment& m, const HermitianOperator& a,
                      const DensityOperator& rho) {
  require_same_dim(inst.dim(), a.dim(), "delta_A");
  return expectation(effective_observable(inst, m) - a, rho);
}

/// System-picture noise: <A_e[m2] + A^2 - 2 A_e[m]*A>. `m2` defaults to the
/// squared values m_k^2.
inline NoiseReport epsilon_sq_system(const Instrument& inst, const ValueAssignment& m,
                                     const HermitianOperator& a, const DensityOperator& rho,
                                     const std::optional<ValueAssignment>& m2 = std::nullopt) {
  require_same_dim(inst.dim(), a.dim(), "epsilon_sq_system");
  require_same_dim(inst.dim(), rho.dim(), "epsilon_sq_system");
  const HermitianOperator ae = effective_observable(inst, m);
  const HermitianOperator ae2 = effective_observable(inst, m2 ? *m2 : m.squared());
  NoiseReport r;
  r.picture = Picture::system;
  r.delta = expectation(ae - a, rho);
  r.first_term = expectation(ae2, rho);
  r.second_term = trace_with(a.matrix() * a.matrix(), rho).real();
  r.cross_term = 2.0 * expectation(jordan_product(ae, a), rho);
  r.value = clip_second_moment(r.first_term + r.second_term - r.cross_term, "epsilon^2");
  return r;
}

/// <N^2> for N = U^dagger (1 (x) M[m]) U - A (x) 1 under rho (x) rho_D.
inline double epsilon_sq_joint(const IndirectModel& model, const ValueAssignment& m,
                               const HermitianOperator& a, const DensityOperator& rho) {
  require_same_dim(model.system_dim(), a.dim(), "epsilon_sq_joint");
  require_same_dim(model.system_dim(), rho.dim(), "epsilon_sq_joint");
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const ComplexMatrix& u = model.unitary();
  const ComplexMatrix meter = tensor_product(ComplexMatrix::Identity(ds, ds), model.readout_observable(m));
  const auto dd = static_cast<Eigen::Index>(model.detector_dim());
  const ComplexMatrix noise =
      u.adjoint() * meter * u - tensor_product(a.matrix(), ComplexMatrix::Identity(dd, dd));
  const ComplexMatrix joint_state = tensor_product(rho.matrix(), model.detector_state().matrix());
  return clip_second_moment((noise * noise * joint_state).trace().real(), "joint epsilon^2");
}

inline double epsilon_sq_joint(const std::optional<IndirectModel>& model, const ValueAssignment& m,
                               const HermitianOperator& a, const DensityOperator& rho) {
  if (!model) fail(ErrorKind::NoJointModel, "apparatus was given as Kraus sets only");
  return epsilon_sq_joint(*model, m, a, rho);
}

struct CrossTermCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// 2<A_e*A> against its three-preparation form
/// <(1+A) A_e (1+A)> - <A_e> - <A A_e A>, with unnormalized preparations.
inline CrossTermCheck three_state_cross_term(const Instrument& inst, const ValueAssignment& m,
                                             const HermitianOperator& a, const DensityOperator& rho) {
  require_same_dim(inst.dim(), a.dim(), "three_state_cross_term");
  const ComplexMatrix ae = effective_observable(inst, m).matrix();
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix shifted = ComplexMatrix::Identity(r.rows(), r.cols()) + a.matrix();
  CrossTermCheck c;
  c.lhs = 2.0 * expectation(jordan_product(HermitianOperator(ae), a), rho);
  c.rhs = (ae * shifted * r * shifted).trace().real() - (ae * r).trace().real() -
          (ae * a.matrix() * r * a.matrix()).trace().real();
  return c;
}

/// Tr[B (rho' - rho)] for the nonselective post-measurement state rho'.
inline double delta_B(const Instrument& inst, const HermitianOperator& b, const DensityOperator& rho) {
  require_same_dim(inst.dim(), b.dim(), "delta_B");
  const DensityOperator after = apply_nonselective(inst, rho);
  return expectation(b, after) - expectation(b, rho);
}

/// System-picture disturbance <(B^2)' + B^2 - 2 B'*B>.
inline NoiseReport eta_sq_system(const Instrument& inst, const HermitianOperator& b,
                                 const DensityOperator& rho) {
  require_same_dim(inst.dim(), b.dim(), "eta_sq_system");
  const HermitianOperator b2(ComplexMatrix(b.matrix() * b.matrix()));
  const HermitianOperator b_pert = adjoint_nonselective(inst, b);
  const HermitianOperator b2_pert = adjoint_nonselective(inst, b2);
  NoiseReport r;
  r.picture = Picture::system;
  r.delta = expectation(b_pert - b, rho);
  r.first_term = expectation(b2_pert, rho);
  r.second_term = expectation(b2, rho);
  r.cross_term = 2.0 * expectation(jordan_product(b_pert, b), rho);
  r.value = clip_second_moment(r.first_term + r.second_term - r.cross_term, "eta^2");
  return r;
}

/// <D^2> for D = U^dagger (B (x) 1) U - B (x) 1.
inline double eta_sq_joint(const IndirectModel& model, const HermitianOperator& b,
                           const DensityOperator& rho) {
  require_same_dim(model.system_dim(), b.dim(), "eta_sq_joint");
  require_same_dim(model.system_dim(), rho.dim(), "eta_sq_joint");
  const auto dd = static_cast<Eigen::Index>(model.detector_dim());
  const ComplexMatrix& u = model.unitary();
  const ComplexMatrix b_joint = tensor_product(b.matrix(), ComplexMatrix::Identity(dd, dd));
  const ComplexMatrix diff = u.adjoint() * b_joint * u - b_joint;
  const ComplexMatrix joint_state = tensor_product(rho.matrix(), model.detector_state().matrix());
  return clip_second_moment((diff * diff * joint_state).trace().real(), "joint eta^2");
}

inline double eta_sq_joint(const std::optional<IndirectModel>& model, const HermitianOperator& b,
                           const DensityOperator& rho) {
  if (!model) fail(ErrorKind::NoJointModel, "apparatus was given as Kraus sets only");
  return eta_sq_joint(*model, b, rho);
}

/// L[M^dagger](B) = -(M^dagger [M,B] - [M^dagger,B] M) / 2.
inline ComplexMatrix lindblad_operation(const ComplexMatrix& m, const ComplexMatrix& b) {
  const ComplexMatrix md = m.adjoint();
  return -0.5 * (md * commutator(m, b) - commutator(md, b) * m);
}

struct LindbladSplit {
  HermitianOperator jordan_part;
  HermitianOperator lindblad_part;
};

/// sum_l M^dagger B M = P_k * B + L_k(B).
inline LindbladSplit lindblad_decomposition(const Instrument& inst, const std::string& label,
                                            const HermitianOperator& b) {
  const std::size_t k = inst.index_of(label);
  require_same_dim(inst.dim(), b.dim(), "lindblad_decomposition");
  ComplexMatrix l = ComplexMatrix::Zero(b.matrix().rows(), b.matrix().cols());
  for (const auto& m : inst.outcomes()[k].operators) l += lindblad_operation(m, b.matrix());
  return {jordan_product(inst.pom()[k], b), HermitianOperator((l + l.adjoint()) / 2.0)};
}

/// eta^2 from the Lindblad terms alone: sum_k <L_k(B^2) - 2 B * L_k(B)>.
inline double eta_sq_lindblad(const Instrument& inst, const HermitianOperator& b,
                              const DensityOperator& rho) {
  const HermitianOperator b2(ComplexMatrix(b.matrix() * b.matrix()));
  double total = 0.0;
  for (const auto& label : inst.labels()) {
    const HermitianOperator l1 = lindblad_decomposition(inst, label, b).lindblad_part;
    const HermitianOperator l2 = lindblad_decomposition(inst, label, b2).lindblad_part;
    total += expectation(l2, rho) - 2.0 * expectation(jordan_product(b, l1), rho);
  }
  return clip_second_moment(total, "Lindblad eta^2");
}

inline bool is_unbiased(const Instrument& inst, const ValueAssignment& m, const HermitianOperator& a) {
  require_same_dim(inst.dim(), a.dim(), "is_unbiased");
  return max_norm(effective_observable(inst, m).matrix() - a.matrix()) <= tol::kUnbiased;
}

inline bool is_qnd(const Instrument& inst, const HermitianOperator& b) {
  require_same_dim(inst.dim(), b.dim(), "is_qnd");
  for (const auto& s : inst.outcomes())
    for (const auto& m : s.operators)
      if (max_norm(commutator(m, b.matrix())) > tol::kQnd) return false;
  return true;
}

struct DispersionForms {
  double spectral = 0.0;                 // sum_k m_k^2 p_k - sum_a A_a^2 p_a
  std::optional<double> contextual;      // sum_k (m_k^2 - m2_k) p_k, when A^2 is in the POM span
  std::optional<std::vector<double>> second_moment_values;
};

inline DispersionForms unbiased_dispersion_forms(const Instrument& inst, const ValueAssignment& m,
                                                 const HermitianOperator& a,
                                                 const DensityOperator& rho) {
  if (!is_unbiased(inst, m, a)) {
    fail(ErrorKind::BiasedInstrument, "A_e[m] differs from the target observable by more than 1e-8");
  }
  const std::vector<double> p = outcome_probabilities(inst, rho);
  const std::vector<double> values = m.ordered(inst.labels());
  double measured = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) measured += values[k] * values[k] * p[k];

  double ideal = 0.0;
  for (const auto& branch : spectral_decompose(a).branches)
    ideal += branch.eigenvalue * branch.eigenvalue * expectation(branch.projector, rho);

  DispersionForms out;
  out.spectral = measured - ideal;
  try {
    const HermitianOperator a2(ComplexMatrix(a.matrix() * a.matrix()));
    const std::vector<double> m2 = solve_contextual_values(std::span(inst.pom()), a2);
    double ctx = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) ctx += (values[k] * values[k] - m2[k]) * p[k];
    out.contextual = ctx;
    out.second_moment_values = m2;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotExpressible) throw;
  }
  return out;
}

/// Unbiased noise as the excess second moment. When A^2 lies in the POM
/// span the moment-reconstruction form is computed too and must agree.
inline double unbiased_dispersion(const Instrument& inst, const ValueAssignment& m,
                                  const HermitianOperator& a, const DensityOperator& rho) {
  const DispersionForms f = unbiased_dispersion_forms(inst, m, a, rho);
  if (f.contextual && std::abs(*f.contextual - f.spectral) > tol::kDispersionAgreement) {
    fail(ErrorKind::InternalConsistency, "dispersion forms disagree: " + std::to_string(f.spectral) +
                                             " vs " + std::to_string(*f.contextual));
  }
  return clip_second_moment(f.spectral, "dispersion");
}

}  // namespace qmeas
