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

struct RandomCase {
  DensityOperator rho;
  HermitianOperator a;
  HermitianOperator b;
  Instrument inst;
  ValueAssignment m;
};

RandomCase random_case(Rng& rng, std::size_t d) {
  RandomCase c;
  c.rho = testing::random_state(rng, d);
  c.a = testing::random_hermitian(rng, d);
  c.b = testing::random_hermitian(rng, d);
  c.inst = testing::random_instrument(rng, d, 2 + d % 2, 2);
  c.m = testing::random_values(rng, c.inst);
  return c;
}

TEST(Tmh, ErrorMarginalsAndMass) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomCase c = random_case(rng, 2 + trial % 2);
    const QuasiDistribution d = tmh_error_distribution(c.rho, c.a, c.inst, c.m);
    EXPECT_NEAR(d.total(), 1.0, 1e-12);
    const std::vector<double> p = outcome_probabilities(c.inst, c.rho);
    const Eigen::VectorXd cols = d.col_marginals();
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(cols(static_cast<Eigen::Index>(k)), p[k], 1e-12);
    const SpectralDecomposition spec = spectral_decompose(c.a);
    const Eigen::VectorXd rows = d.row_marginals();
    for (std::size_t i = 0; i < spec.size(); ++i)
      EXPECT_NEAR(rows(static_cast<Eigen::Index>(i)), expectation(spec.branches[i].projector, c.rho), 1e-12);
  }
}

TEST(Tmh, DisturbanceMarginals) {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomCase c = random_case(rng, 2 + trial % 2);
    const QuasiDistribution d = tmh_disturbance_distribution(c.rho, c.b, c.inst);
    EXPECT_NEAR(d.total(), 1.0, 1e-12);
    const SpectralDecomposition spec = spectral_decompose(c.b);
    const DensityOperator after = apply_nonselective(c.inst, c.rho);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      // Columns: initial statistics of B. Rows: statistics after the apparatus.
      EXPECT_NEAR(d.col_marginals()(ii), expectation(spec.branches[i].projector, c.rho), 1e-12);
      EXPECT_NEAR(d.row_marginals()(ii), expectation(spec.branches[i].projector, after), 1e-12);
    }
  }
}

TEST(Tmh, QuasiFormsEqualDirectForms) {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomCase c = random_case(rng, 2 + trial % 2);
    EXPECT_NEAR(quasi_mean_squared_difference(tmh_error_distribution(c.rho, c.a, c.inst, c.m)),
                epsilon_sq_system(c.inst, c.m, c.a, c.rho).value, 1e-10);
    EXPECT_NEAR(quasi_mean_squared_difference(tmh_disturbance_distribution(c.rho, c.b, c.inst)),
                eta_sq_system(c.inst, c.b, c.rho).value, 1e-10);
  }
}

TEST(Tmh, EntriesMatchDirectOracle) {
  Rng rng(44);
  const RandomCase c = random_case(rng, 3);
  const QuasiDistribution d = tmh_error_distribution(c.rho, c.a, c.inst, c.m);
  const testing::Eig e = testing::eig(c.a.matrix());  // ascending; table rows are descending
  const std::size_t n = e.values.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c.inst.size(); ++k) {
      const ComplexMatrix& pi = e.projectors[n - 1 - i];
      const ComplexMatrix& pk = c.inst.pom()[k].matrix();
      const double want = testing::trace_product(pk * pi, c.rho.matrix()).real();
      EXPECT_NEAR(d.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), want, 1e-12);
    }
}

TEST(Tmh, CommutingCaseIsNonnegative) {
  // Diagonal POM, diagonal A: the distribution is a true joint probability.
  const Instrument inst = theta_pom_instrument(0.9);
  const QuasiDistribution d = tmh_error_distribution(testing::bloch_state(0.7, 0.0, 0.1), pauli::z(), inst,
                                                     ValueAssignment({"+", "-"}, {1, -1}));
  EXPECT_GE(d.min_entry(), 0.0);
}

TEST(Tmh, NegativityWitnessBySeededSearch) {
  double most_negative = 0.0;
  for (std::uint64_t seed = 0; seed < 200 && most_negative > -1e-3; ++seed) {
    const Scenario s = generate_random(2, 2, seed);
    most_negative = std::min(most_negative,
                             tmh_error_distribution(s.state, s.observable_a, s.instrument, s.values_m).min_entry());
  }
  EXPECT_LE(most_negative, -1e-3);
}

TEST(WeakValue, MatchesDefinitionAndLeavesUnitInterval) {
  // Pre-selection near |0>, post-selection near |1>, weak value of |+><+|.
  const DensityOperator rho = DensityOperator::pure((ComplexVector(2) << 1.0, 0.05).finished());
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const HermitianOperator pi(ComplexMatrix(plus * plus.adjoint()));
  ComplexVector post(2);
  post << 0.0, 1.0;
  const HermitianOperator effect(ComplexMatrix(post * post.adjoint()));
  const double wv = conditional_weak_value(rho, pi, effect);
  const Complex num = post.dot(pi.matrix() * rho.matrix() * post);
  EXPECT_NEAR(wv, num.real() / expectation(effect, rho), 1e-12);
  EXPECT_GT(wv, 1.0);
}

TEST(WeakValue, ZeroProbabilityConditioning) {
  const DensityOperator rho = DensityOperator::pure(ComplexVector::Unit(2, 0));
  EXPECT_EQ(kind_of([&] {
              conditional_weak_value(rho, pauli::x(), HermitianOperator(testing::diag2(0.0, 1.0)));
            }),
            ErrorKind::ZeroProbabilityConditioning);
}

TEST(WeakProbe, ValidatesStrength) {
  const HermitianOperator p(testing::diag2(1.0, 0.0));
  EXPECT_EQ(kind_of([&] { WeakProbe(p, 0.0); }), ErrorKind::InvalidStrength);
  EXPECT_EQ(kind_of([&] { WeakProbe(p, 1.5); }), ErrorKind::InvalidStrength);
  EXPECT_EQ(kind_of([&] { WeakProbe(pauli::z(), 0.5); }), ErrorKind::InvalidArgument);
}

TEST(WeakProbe, CalibrationReconstructsProjector) {
  const HermitianOperator p(testing::diag2(0.0, 1.0));
  for (double g : {1.0, 0.5, 0.1, 0.01}) {
    const WeakProbe probe(p, g);
    ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
    ComplexMatrix completeness = ComplexMatrix::Zero(2, 2);
    for (std::size_t l = 0; l < 2; ++l) {
      const ComplexMatrix e = probe.kraus(l).adjoint() * probe.kraus(l);
      sum += probe.calibration(l) * e;
      completeness += e;
    }
    EXPECT_LT(max_norm(sum - p.matrix()), 1e-12 / g);
    EXPECT_LT(max_norm(completeness - ComplexMatrix::Identity(2, 2)), 1e-14);
  }
}

// Closed-form weak-probe deviation: the probe scales the off-diagonal part
// of Pi rho by sqrt(1 - g^2), so each entry differs from the TMH value by
// (1 - sqrt(1 - g^2)) Re Tr[E Pi rho (1 - Pi)] for the relevant effect E.
TEST(WeakProbe, ErrorTableMatchesClosedForm) {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomCase c = random_case(rng, 2 + trial % 2);
    const SpectralDecomposition spec = spectral_decompose(c.a);
    const QuasiDistribution tmh = tmh_error_distribution(c.rho, c.a, c.inst, c.m);
    for (double g : {0.9, 0.3, 0.05}) {
      const QuasiDistribution weak = weak_probe_error_distribution(c.rho, c.a, c.inst, c.m, g);
      const double shrink = 1.0 - std::sqrt(1.0 - g * g);
      for (std::size_t i = 0; i < spec.size(); ++i) {
        const ComplexMatrix& pi = spec.branches[i].projector.matrix();
        const ComplexMatrix q = ComplexMatrix::Identity(pi.rows(), pi.cols()) - pi;
        for (std::size_t k = 0; k < c.inst.size(); ++k) {
          const double cross = (c.inst.pom()[k].matrix() * pi * c.rho.matrix() * q).trace().real();
          const auto ii = static_cast<Eigen::Index>(i);
          const auto kk = static_cast<Eigen::Index>(k);
          EXPECT_NEAR(tmh.table(ii, kk) - weak.table(ii, kk), shrink * cross, 1e-11);
        }
      }
    }
  }
}

TEST(WeakProbe, DisturbanceTableMatchesClosedForm) {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomCase c = random_case(rng, 2 + trial % 2);
    const SpectralDecomposition spec = spectral_decompose(c.b);
    const QuasiDistribution tmh = tmh_disturbance_distribution(c.rho, c.b, c.inst);
    for (double g : {0.7, 0.1}) {
      const QuasiDistribution weak = weak_probe_disturbance_distribution(c.rho, c.b, c.inst, g);
      const double shrink = 1.0 - std::sqrt(1.0 - g * g);
      for (std::size_t bp = 0; bp < spec.size(); ++bp) {
        const ComplexMatrix qbp = adjoint_nonselective(c.inst, spec.branches[bp].projector).matrix();
        for (std::size_t b = 0; b < spec.size(); ++b) {
          const ComplexMatrix& pi = spec.branches[b].projector.matrix();
          const ComplexMatrix q = ComplexMatrix::Identity(pi.rows(), pi.cols()) - pi;
          const double cross = (qbp * pi * c.rho.matrix() * q).trace().real();
          const auto r = static_cast<Eigen::Index>(bp);
          const auto col = static_cast<Eigen::Index>(b);
          EXPECT_NEAR(tmh.table(r, col) - weak.table(r, col), shrink * cross, 1e-11);
        }
      }
    }
  }
}

TEST(WeakProbe, ProjectiveEndpoint) {
  // At g = 1 the probe is a projective measurement of Pi followed by the
  // apparatus: entries are Tr[P_k Pi rho Pi].
  Rng rng(47);
  const RandomCase c = random_case(rng, 2);
  const QuasiDistribution weak = weak_probe_error_distribution(c.rho, c.a, c.inst, c.m, 1.0);
  const SpectralDecomposition spec = spectral_decompose(c.a);
  for (std::size_t i = 0; i < spec.size(); ++i)
    for (std::size_t k = 0; k < c.inst.size(); ++k) {
      const ComplexMatrix& pi = spec.branches[i].projector.matrix();
      const double want = (c.inst.pom()[k].matrix() * pi * c.rho.matrix() * pi).trace().real();
      EXPECT_NEAR(weak.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), want, 1e-12);
    }
}

TEST(WeakProbe, ThetaPomSigmaXDeviation) {
  // theta = pi/3, A = sigma_x, rho = |0><0|: |Re Tr[P_k Pi rho Q]| = 1/8 for
  // every cell, so the max-norm deviation is (1 - sqrt(1 - g^2)) / 8.
  const Instrument inst = theta_pom_instrument(std::numbers::pi / 3.0);
  const ValueAssignment m({"+", "-"}, {2.0, -2.0});
  const DensityOperator rho = DensityOperator::pure(ComplexVector::Unit(2, 0));
  const QuasiDistribution tmh = tmh_error_distribution(rho, pauli::x(), inst, m);
  for (double g : {0.5, 0.2, 0.1, 0.05, 0.02, 0.01}) {
    const double dist = max_table_distance(weak_probe_error_distribution(rho, pauli::x(), inst, m, g), tmh);
    EXPECT_NEAR(dist, (1.0 - std::sqrt(1.0 - g * g)) / 8.0, 1e-13);
  }
}

}  // namespace
}  // namespace qmeas
