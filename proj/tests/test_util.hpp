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

// Seeded generators and reference formulas shared by the tests. Random
// inputs here come from std::mt19937_64 so they are independent of the
// library's own Philox-based generators.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "qmeas/qmeas.hpp"

namespace qmeas::testing {

using Rng = std::mt19937_64;

/// Kind of the qmeas::Error thrown by f; records a failure if none is thrown.
template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a qmeas::Error";
  return ErrorKind::InternalConsistency;
}

inline ComplexMatrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline DensityOperator random_state(Rng& rng, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  const ComplexMatrix g = gaussian_matrix(rng, n, n);
  ComplexMatrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityOperator(ComplexMatrix((w + w.adjoint()) / 2.0));
}

inline HermitianOperator random_hermitian(Rng& rng, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  const ComplexMatrix g = gaussian_matrix(rng, n, n);
  return HermitianOperator(ComplexMatrix((g + g.adjoint()) / 2.0));
}

/// Unitary from the QR decomposition of a Gaussian matrix (not Haar-exact;
/// the tests only need generic unitaries).
inline ComplexMatrix random_unitary(Rng& rng, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::HouseholderQR<ComplexMatrix> qr(gaussian_matrix(rng, n, n));
  return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

/// Instrument with `outcomes` outcomes of `per_outcome` Kraus operators each,
/// cut from a random isometry.
inline Instrument random_instrument(Rng& rng, std::size_t d, std::size_t outcomes, std::size_t per_outcome = 1) {
  const auto n = static_cast<Eigen::Index>(d);
  const Eigen::Index rows = n * static_cast<Eigen::Index>(outcomes * per_outcome);
  Eigen::HouseholderQR<ComplexMatrix> qr(gaussian_matrix(rng, rows, n));
  const ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(rows, n);
  std::vector<KrausSet> sets;
  Eigen::Index block = 0;
  for (std::size_t k = 0; k < outcomes; ++k) {
    KrausSet s{"k" + std::to_string(k), {}};
    for (std::size_t l = 0; l < per_outcome; ++l) s.operators.push_back(v.block(n * block++, 0, n, n));
    sets.push_back(std::move(s));
  }
  return Instrument(std::move(sets));
}

inline ValueAssignment random_values(Rng& rng, const Instrument& inst) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v;
  for (std::size_t k = 0; k < inst.size(); ++k) v.push_back(u(rng));
  return ValueAssignment(inst.labels(), v);
}

/// Random unitary model on a system of dimension ds and detector of
/// dimension dd with a mixed detector state and computational readout.
inline IndirectModel random_indirect(Rng& rng, std::size_t ds, std::size_t dd) {
  std::vector<ComplexVector> basis;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < dd; ++k) {
    basis.push_back(ComplexVector::Unit(static_cast<Eigen::Index>(dd), static_cast<Eigen::Index>(k)));
    labels.push_back("d" + std::to_string(k));
  }
  return IndirectModel(ds, random_state(rng, dd), random_unitary(rng, ds * dd), basis, labels);
}

/// Tr(X rho) computed entrywise.
inline Complex trace_product(const ComplexMatrix& x, const ComplexMatrix& rho) {
  Complex t = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) t += x(i, j) * rho(j, i);
  return t;
}

/// Eigen-projectors of a Hermitian matrix assuming a nondegenerate spectrum
/// (generic random operators), ascending.
struct Eig {
  std::vector<double> values;
  std::vector<ComplexMatrix> projectors;
};

inline Eig eig(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
  Eig out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out.values.push_back(es.eigenvalues()(i));
    out.projectors.push_back(es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
  }
  return out;
}

inline ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline DensityOperator bloch_state(double x, double y, double z) {
  return DensityOperator(ComplexMatrix(
      (ComplexMatrix::Identity(2, 2) + x * pauli::x().matrix() + y * pauli::y().matrix() + z * pauli::z().matrix()) /
      2.0));
}

inline Scenario load_bundled(const std::string& name) {
  return load_scenario(std::string(QMEAS_SCENARIO_DIR) + "/" + name);
}

}  // namespace qmeas::testing
