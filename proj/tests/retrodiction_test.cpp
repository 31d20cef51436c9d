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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

namespace qmeas {
namespace {

using testing::kind_of;
using testing::Rng;

TEST(Retrodiction, ThetaPomErrorIsSinTheta) {
  // rho_k = (1 pm cos(theta) sigma_z)/2, so Var(sigma_z) = 1 - cos^2 = sin^2.
  for (int k = 0; k <= 24; ++k) {
    const double theta = k * std::numbers::pi / 24.0;
    const Instrument inst = theta_pom_instrument(theta);
    for (const char* label : {"+", "-"})
      EXPECT_NEAR(retrodictive_error(inst, label, pauli::z()), std::abs(std::sin(theta)), 1e-10);
  }
}

TEST(Retrodiction, StateIsNormalizedPomElement) {
  Rng rng(51);
  const Instrument inst = testing::random_instrument(rng, 3, 4);
  for (const auto& label : inst.labels()) {
    const RetrodictiveState r = retrodictive_state(inst, label);
    const ComplexMatrix& p = inst.pom()[inst.index_of(label)].matrix();
    EXPECT_NEAR(r.source_trace, p.trace().real(), 1e-14);
    EXPECT_LT(max_norm(r.state.matrix() - p / p.trace().real()), 1e-14);
  }
}

TEST(Retrodiction, NullOutcomeIsRejected) {
  const ComplexMatrix tiny = ComplexMatrix::Identity(2, 2) * 1e-7;
  const ComplexMatrix rest = ComplexMatrix::Identity(2, 2) * std::sqrt(1.0 - 1e-14);
  const Instrument inst({{"never", {tiny}}, {"always", {rest}}});
  EXPECT_EQ(kind_of([&] { retrodictive_state(inst, "never"); }), ErrorKind::NullOutcome);
  EXPECT_EQ(kind_of([&] { InterdictiveState(inst, "never"); }), ErrorKind::NullOutcome);
}

TEST(Retrodiction, HofmannOneOnThetaPom) {
  // Retrodictive states are diagonal: no commutator contribution.
  const double theta = 0.8;
  const Instrument inst = theta_pom_instrument(theta);
  EXPECT_NEAR(retrodictive_error(inst, "+", pauli::x()), 1.0, 1e-12);
  EXPECT_NEAR(retrodictive_commutator_bound(inst, "+", pauli::z(), pauli::x()), 0.0, 1e-12);
}

TEST(Interdiction, JointDistributionIsProbability) {
  Rng rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const Instrument inst = testing::random_instrument(rng, d, 3, 2);
    const HermitianOperator b = testing::random_hermitian(rng, d);
    for (const auto& label : inst.labels()) {
      const QuasiDistribution j = interdictive_joint_distribution(inst, label, b);
      EXPECT_GE(j.min_entry(), -1e-14);
      EXPECT_NEAR(j.total(), 1.0, 1e-12);
    }
  }
}

TEST(Interdiction, JointDistributionMatchesKrausSum) {
  // p(b, b'|k) = sum_l |<b'|M_l|b>|^2 / sum_l Tr(M_l M_l^dagger).
  Rng rng(53);
  const Instrument inst = testing::random_instrument(rng, 3, 2, 2);
  const HermitianOperator b = testing::random_hermitian(rng, 3);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(b.matrix());
  for (const auto& set : inst.outcomes()) {
    double norm = 0.0;
    for (const auto& m : set.operators) norm += (m * m.adjoint()).trace().real();
    const QuasiDistribution j = interdictive_joint_distribution(inst, set.label, b);
    for (Eigen::Index row = 0; row < 3; ++row)
      for (Eigen::Index col = 0; col < 3; ++col) {
        // Table axes are descending; eigen solver output is ascending.
        const ComplexVector ket_b = es.eigenvectors().col(2 - row);
        const ComplexVector ket_bp = es.eigenvectors().col(2 - col);
        double want = 0.0;
        for (const auto& m : set.operators) want += std::norm(ket_bp.dot(m * ket_b));
        EXPECT_NEAR(j.table(row, col), want / norm, 1e-12);
      }
  }
}

TEST(Interdiction, QndOutcomeDoesNotDisturb) {
  const Instrument inst = theta_pom_instrument(0.6);
  EXPECT_NEAR(interdictive_disturbance(inst, "+", pauli::z()), 0.0, 1e-12);
  EXPECT_GT(interdictive_disturbance(inst, "+", pauli::x()), 0.1);
}

TEST(Restricted, DecompositionIdentity) {
  // eta^2_{k,b'} = eps^2_{k,b'} + (B_b' - <B>_{k,b'})^2, with eta computed
  // independently from the conditioned eigen-statistics.
  Rng rng(54);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + trial % 2;
    const Instrument inst = testing::random_instrument(rng, d, 2, 2);
    const HermitianOperator a = testing::random_hermitian(rng, d);
    const HermitianOperator b = testing::random_hermitian(rng, d);
    const SpectralDecomposition spec = spectral_decompose(b);
    for (const auto& label : inst.labels())
      for (std::size_t bp = 0; bp < spec.size(); ++bp) {
        const RestrictedMetrics r = restricted_metrics(inst, label, bp, a, b);
        const double shift = spec.branches[bp].eigenvalue - r.retro_mean_B;
        EXPECT_NEAR(r.eta_B_sq, r.eps_B_sq + shift * shift, 1e-12);
        EXPECT_GE(r.eta_B() * r.eps_A() - r.eps_B() * r.eps_A(), -1e-10);
      }
  }
}

TEST(Restricted, AveragingIdentity) {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const Instrument inst = testing::random_instrument(rng, 2, 3);
    const HermitianOperator a = testing::random_hermitian(rng, 2);
    const HermitianOperator b = testing::random_hermitian(rng, 2);
    const std::size_t n = spectral_decompose(b).size();
    for (const auto& label : inst.labels()) {
      double avg = 0.0;
      double mass = 0.0;
      for (std::size_t bp = 0; bp < n; ++bp) {
        const RestrictedMetrics r = restricted_metrics(inst, label, bp, a, b);
        avg += r.p_posterior * r.eta_B_sq;
        mass += r.p_posterior;
      }
      EXPECT_NEAR(mass, 1.0, 1e-12);
      EXPECT_NEAR(avg, interdictive_disturbance_sq(inst, label, b), 1e-10);
    }
  }
}

TEST(Restricted, ZeroPosteriorIsRejected) {
  // Projective sigma_z outcome "0" never leaves the system in |1>.
  const Instrument inst = computational_instrument(2);
  EXPECT_EQ(kind_of([&] { restricted_metrics(inst, "0", 1, pauli::x(), pauli::z()); }), ErrorKind::ZeroPosterior);
  EXPECT_EQ(kind_of([&] { restricted_metrics(inst, "0", 5, pauli::x(), pauli::z()); }), ErrorKind::InvalidArgument);
}

}  // namespace
}  // namespace qmeas
