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
 * Terletsky-Margenau-Hill joint quasiprobabilities for error and disturbance,
 * conditional weak values, and their approximate determination with a
 * tunable-strength two-outcome probe.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmeas/error.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/operator.hpp"

namespace qmeas {

/// Dense real table with labelled rows/columns and a value attached to each
/// label. Entries may be negative and are never clipped.
struct QuasiDistribution {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> row_values;
  std::vector<double> col_values;
  Eigen::MatrixXd table;

  double total() const { return table.sum(); }
  Eigen::VectorXd row_marginals() const { return table.rowwise().sum(); }
  Eigen::VectorXd col_marginals() const { return table.colwise().sum().transpose(); }
  double min_entry() const { return table.minCoeff(); }
};

namespace detail {

inline std::vector<std::string> branch_labels(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Re Tr[(X * Y) rho] for Hermitian X, Y.
inline double jordan_expectation(const ComplexMatrix& x, const ComplexMatrix& y, const ComplexMatrix& rho) {
  return (x * y * rho).trace().real() * 0.5 + (y * x * rho).trace().real() * 0.5;
}

}  // namespace detail

/// table[a][k] = <Pi_a * P_k>; rows are eigen-branches of A (values A_a),
/// columns are outcomes (values m_k).
inline QuasiDistribution tmh_error_distribution(const DensityOperator& rho, const HermitianOperator& a,
                                                const Instrument& inst, const ValueAssignment& m) {
  require_same_dim(rho.dim(), a.dim(), "tmh_error_distribution");
  require_same_dim(rho.dim(), inst.dim(), "tmh_error_distribution");
  const SpectralDecomposition spec = spectral_decompose(a);
  QuasiDistribution d;
  d.row_labels = detail::branch_labels("a", spec.size());
  d.row_values = spec.eigenvalues();
  d.col_labels = inst.labels();
  d.col_values = m.ordered(inst.labels());
  d.table.resize(static_cast<Eigen::Index>(spec.size()), static_cast<Eigen::Index>(inst.size()));
  for (std::size_t i = 0; i < spec.size(); ++i)
    for (std::size_t k = 0; k < inst.size(); ++k)
      d.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = detail::jordan_expectation(
          spec.branches[i].projector.matrix(), inst.pom()[k].matrix(), rho.matrix());
  return d;
}

/// table[b'][b] = <Q_b' * Pi_b> with Q_b' = A*[1](Pi_b'); both axes carry
/// the eigenvalues of B.
inline QuasiDistribution tmh_disturbance_distribution(const DensityOperator& rho, const HermitianOperator& b,
                                                      const Instrument& inst) {
  require_same_dim(rho.dim(), b.dim(), "tmh_disturbance_distribution");
  require_same_dim(rho.dim(), inst.dim(), "tmh_disturbance_distribution");
  const SpectralDecomposition spec = spectral_decompose(b);
  QuasiDistribution d;
  d.row_labels = detail::branch_labels("b'", spec.size());
  d.col_labels = detail::branch_labels("b", spec.size());
  d.row_values = spec.eigenvalues();
  d.col_values = spec.eigenvalues();
  const auto n = static_cast<Eigen::Index>(spec.size());
  d.table.resize(n, n);
  for (Eigen::Index bp = 0; bp < n; ++bp) {
    const HermitianOperator q = adjoint_nonselective(inst, spec.branches[static_cast<std::size_t>(bp)].projector);
    for (Eigen::Index bb = 0; bb < n; ++bb)
      d.table(bp, bb) = detail::jordan_expectation(
          q.matrix(), spec.branches[static_cast<std::size_t>(bb)].projector.matrix(), rho.matrix());
  }
  return d;
}

/// sum over cells of (row_value - col_value)^2 * weight.
inline double quasi_mean_squared_difference(const QuasiDistribution& d) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.table.rows(); ++i)
    for (Eigen::Index j = 0; j < d.table.cols(); ++j) {
      const double diff = d.row_values[static_cast<std::size_t>(i)] - d.col_values[static_cast<std::size_t>(j)];
      total += diff * diff * d.table(i, j);
    }
  return total;
}

/// Re Tr(P_k Pi_a rho) / Tr(P_k rho); may fall outside [0, 1].
inline double conditional_weak_value(const DensityOperator& rho, const HermitianOperator& projector,
                                     const HermitianOperator& effect) {
  require_same_dim(rho.dim(), projector.dim(), "conditional_weak_value");
  require_same_dim(rho.dim(), effect.dim(), "conditional_weak_value");
  const double pk = expectation(effect, rho);
  if (!(pk > 1e-12)) {
    fail(ErrorKind::ZeroProbabilityConditioning, "conditioning outcome has probability " + std::to_string(pk));
  }
  return (effect.matrix() * projector.matrix() * rho.matrix()).trace().real() / pk;
}

/// Two-outcome probe of a projector Pi with strength g in (0, 1]:
///   M_pm = sqrt((1 pm g)/2) Pi + sqrt((1 -+ g)/2) (1 - Pi),
/// calibrated so that n_+ P_+ + n_- P_- = Pi with n_pm = (1 pm 1/g)/2.
class WeakProbe {
 public:
  WeakProbe(const HermitianOperator& projector, double strength) : projector_(projector), strength_(strength) {
    if (!(strength > 0.0 && strength <= 1.0)) {
      fail(ErrorKind::InvalidStrength, "probe strength must lie in (0, 1], got " + std::to_string(strength));
    }
    const ComplexMatrix& p = projector.matrix();
    if (max_norm(p * p - p) > 1e-9) fail(ErrorKind::InvalidArgument, "probe target is not a projector");
    const auto n = p.rows();
    const ComplexMatrix q = ComplexMatrix::Identity(n, n) - p;
    const double g = strength;
    kraus_[0] = std::sqrt((1.0 + g) / 2.0) * p + std::sqrt((1.0 - g) / 2.0) * q;
    kraus_[1] = std::sqrt((1.0 - g) / 2.0) * p + std::sqrt((1.0 + g) / 2.0) * q;
    calibration_[0] = (1.0 + 1.0 / g) / 2.0;
    calibration_[1] = (1.0 - 1.0 / g) / 2.0;

    // When Pi is neither 0 nor 1 the calibration is the unique solution of
    // the contextual-value equation; solve it and check the closed form.
    const double rank = p.trace().real();
    if (rank > 0.5 && rank < static_cast<double>(n) - 0.5) {
      const std::vector<HermitianOperator> effects = {
          HermitianOperator(ComplexMatrix(kraus_[0].adjoint() * kraus_[0])),
          HermitianOperator(ComplexMatrix(kraus_[1].adjoint() * kraus_[1]))};
      const std::vector<double> solved = solve_contextual_values(std::span(effects), projector);
      const double scale = 1.0 + std::abs(calibration_[0]);
      if (std::abs(solved[0] - calibration_[0]) > 1e-9 * scale ||
          std::abs(solved[1] - calibration_[1]) > 1e-9 * scale) {
        fail(ErrorKind::InternalConsistency, "probe calibration solve disagrees with closed form");
      }
    }
  }

  double strength() const { return strength_; }
  const HermitianOperator& projector() const { return projector_; }
  const ComplexMatrix& kraus(std::size_t outcome) const { return kraus_[outcome]; }
  double calibration(std::size_t outcome) const { return calibration_[outcome]; }
  static constexpr std::size_t outcomes() { return 2; }

 private:
  HermitianOperator projector_;
  double strength_;
  ComplexMatrix kraus_[2];
  double calibration_[2];
};

/// sum_l n_l Tr[P_k M_l rho M_l^dagger] for a probe on each eigen-branch of A.
inline QuasiDistribution weak_probe_error_distribution(const DensityOperator& rho, const HermitianOperator& a,
                                                       const Instrument& inst, const ValueAssignment& m,
                                                       double strength) {
  QuasiDistribution d = tmh_error_distribution(rho, a, inst, m);
  const SpectralDecomposition spec = spectral_decompose(a);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const WeakProbe probe(spec.branches[i].projector, strength);
    for (std::size_t k = 0; k < inst.size(); ++k) {
      double acc = 0.0;
      for (std::size_t l = 0; l < WeakProbe::outcomes(); ++l) {
        const ComplexMatrix after = probe.kraus(l) * rho.matrix() * probe.kraus(l).adjoint();
        acc += probe.calibration(l) * (inst.pom()[k].matrix() * after).trace().real();
      }
      d.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = acc;
    }
  }
  return d;
}

/// Probe Pi_b, apply every outcome of the instrument, then project onto
/// Pi_b': table[b'][b] = sum_{l,k} n_l Tr[Pi_b' A_k(M_l rho M_l^dagger)].
inline QuasiDistribution weak_probe_disturbance_distribution(const DensityOperator& rho, const HermitianOperator& b,
                                                             const Instrument& inst, double strength) {
  QuasiDistribution d = tmh_disturbance_distribution(rho, b, inst);
  const SpectralDecomposition spec = spectral_decompose(b);
  const auto n = static_cast<Eigen::Index>(spec.size());
  for (Eigen::Index bb = 0; bb < n; ++bb) {
    const WeakProbe probe(spec.branches[static_cast<std::size_t>(bb)].projector, strength);
    std::vector<double> acc(spec.size(), 0.0);
    for (std::size_t l = 0; l < WeakProbe::outcomes(); ++l) {
      const ComplexMatrix probed = probe.kraus(l) * rho.matrix() * probe.kraus(l).adjoint();
      for (const auto& set : inst.outcomes()) {
        ComplexMatrix out = ComplexMatrix::Zero(probed.rows(), probed.cols());
        for (const auto& mk : set.operators) out += mk * probed * mk.adjoint();
        for (Eigen::Index bp = 0; bp < n; ++bp)
          acc[static_cast<std::size_t>(bp)] += probe.calibration(l) *
              (spec.branches[static_cast<std::size_t>(bp)].projector.matrix() * out).trace().real();
      }
    }
    for (Eigen::Index bp = 0; bp < n; ++bp) d.table(bp, bb) = acc[static_cast<std::size_t>(bp)];
  }
  return d;
}

inline double max_table_distance(const QuasiDistribution& x, const QuasiDistribution& y) {
  if (x.table.rows() != y.table.rows() || x.table.cols() != y.table.cols()) {
    fail(ErrorKind::DimensionMismatch, "distribution shapes differ");
  }
  return (x.table - y.table).cwiseAbs().maxCoeff();
}

}  // namespace qmeas
