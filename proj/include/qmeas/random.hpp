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

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmeas/instrument.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/philox.hpp"

namespace qmeas::random {

/// i.i.d. standard complex Gaussian entries (E|z|^2 = 1).
inline ComplexMatrix ginibre(PhiloxStream& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const double s = std::sqrt(0.5);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(s * re, s * im);
    }
  return g;
}

/// Normalized complex Wishart state G G^dagger / Tr.
inline DensityOperator wishart_state(PhiloxStream& rng, std::size_t d) {
  const ComplexMatrix g = ginibre(rng, d, d);
  ComplexMatrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityOperator(ComplexMatrix((w + w.adjoint()) / 2.0));
}

inline DensityOperator pure_state(PhiloxStream& rng, std::size_t d) {
  return DensityOperator::pure(ginibre(rng, d, 1).col(0));
}

/// Gaussian Hermitian ensemble: (G + G^dagger) / 2.
inline HermitianOperator hermitian(PhiloxStream& rng, std::size_t d) {
  const ComplexMatrix g = ginibre(rng, d, d);
  return HermitianOperator(ComplexMatrix((g + g.adjoint()) / 2.0));
}

/// Haar-distributed isometry (rows x cols, rows >= cols) from the QR of a
/// Ginibre matrix with the phases of R's diagonal divided out.
inline ComplexMatrix haar_isometry(PhiloxStream& rng, std::size_t rows, std::size_t cols) {
  const ComplexMatrix g = ginibre(rng, rows, cols);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(g.rows(), g.cols());
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

inline ComplexMatrix haar_unitary(PhiloxStream& rng, std::size_t d) { return haar_isometry(rng, d, d); }

/// Instrument with one Kraus operator per outcome, cut from a Haar isometry
/// C^d -> C^(d * outcomes). Labels are "0", "1", ...
inline Instrument isometry_instrument(PhiloxStream& rng, std::size_t d, std::size_t outcomes) {
  const ComplexMatrix v = haar_isometry(rng, d * outcomes, d);
  const auto n = static_cast<Eigen::Index>(d);
  std::vector<KrausSet> sets;
  for (std::size_t k = 0; k < outcomes; ++k)
    sets.push_back({std::to_string(k), {v.block(static_cast<Eigen::Index>(k) * n, 0, n, n)}});
  return Instrument(std::move(sets));
}

}  // namespace qmeas::random
