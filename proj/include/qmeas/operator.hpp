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
 * Dense complex linear algebra for finite-dimensional observables and states.
 *
 * Tensor products order the system factor first and the detector factor
 * second, so a joint basis index is `system_index * d_D + detector_index`.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmeas/error.hpp"

namespace qmeas {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace tol {
inline constexpr double kHermitian = 1e-9;
inline constexpr double kTrace = 1e-9;
inline constexpr double kNegativeEigenvalue = 1e-9;
inline constexpr double kEigenGrouping = 1e-8;
inline constexpr double kVarianceClip = 1e-12;
}  // namespace tol

inline double max_norm(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline void require_finite(const ComplexMatrix& m, const char* what) {
  if (!all_finite(m)) fail(ErrorKind::NonFinite, std::string(what) + " has non-finite entries");
}

/// Square complex matrix that is exactly Hermitian after construction.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(const ComplexMatrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      fail(ErrorKind::NotSquare, "operator must be a non-empty square matrix, got " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    require_finite(m, "operator");
    const double asym = max_norm(m - m.adjoint());
    if (asym > tol::kHermitian) {
      fail(ErrorKind::NotHermitian,
           "max |M - M^dagger| = " + std::to_string(asym) + " exceeds 1e-9");
    }
    matrix_ = (m + m.adjoint()) / 2.0;
  }

  static HermitianOperator identity(std::size_t d) {
    return HermitianOperator(ComplexMatrix::Identity(static_cast<Eigen::Index>(d),
                                                     static_cast<Eigen::Index>(d)));
  }
  static HermitianOperator zero(std::size_t d) {
    return HermitianOperator(
        ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  }
  static HermitianOperator diagonal(const std::vector<double>& entries) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(entries.size()),
                                          static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = entries[i];
    }
    return HermitianOperator(m);
  }

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(a.matrix_ + b.matrix_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(a.matrix_ - b.matrix_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(s * a.matrix_);
  }

 private:
  ComplexMatrix matrix_;
};

/// Positive-semidefinite, unit-trace operator.
///
/// Eigenvalues down to -1e-9 are accepted and clipped to zero; the trace
/// must be within 1e-9 of one and is renormalized exactly.
class DensityOperator {
 public:
  DensityOperator() = default;

  explicit DensityOperator(const HermitianOperator& op) {
    const ComplexMatrix& m = op.matrix();
    const double trace = m.trace().real();
    if (std::abs(trace - 1.0) > tol::kTrace) {
      fail(ErrorKind::TraceNotOne, "state trace is " + std::to_string(trace));
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
    if (eig.info() != Eigen::Success) fail(ErrorKind::InternalNumeric, "eigensolver failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -tol::kNegativeEigenvalue) {
      fail(ErrorKind::NotPositive,
           "state has eigenvalue " + std::to_string(lambda.minCoeff()) + " below -1e-9");
    }
    ComplexMatrix rho = m;
    if (lambda.minCoeff() < 0.0) {
      const Eigen::VectorXd clipped = lambda.cwiseMax(0.0);
      rho = eig.eigenvectors() * clipped.cast<Complex>().asDiagonal() *
            eig.eigenvectors().adjoint();
    }
    rho /= rho.trace().real();
    op_ = HermitianOperator((rho + rho.adjoint()) / 2.0);
  }

  explicit DensityOperator(const ComplexMatrix& m) : DensityOperator(HermitianOperator(m)) {}

  /// |psi><psi| for a (not necessarily normalized) nonzero vector.
  static DensityOperator pure(const ComplexVector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) fail(ErrorKind::InvalidArgument, "pure state vector is zero");
    const ComplexVector unit = psi / n;
    return DensityOperator(ComplexMatrix(unit * unit.adjoint()));
  }

  static DensityOperator maximally_mixed(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return DensityOperator(ComplexMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(d)));
  }

  std::size_t dim() const { return op_.dim(); }
  const HermitianOperator& op() const { return op_; }
  const ComplexMatrix& matrix() const { return op_.matrix(); }

 private:
  HermitianOperator op_;
};

namespace pauli {
inline HermitianOperator x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}
inline HermitianOperator y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return HermitianOperator(m);
}
inline HermitianOperator z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m);
}
}  // namespace pauli

inline void require_same_dim(std::size_t a, std::size_t b, const char* context) {
  if (a != b) {
    fail(ErrorKind::DimensionMismatch, std::string(context) + ": dimensions " +
                                           std::to_string(a) + " and " + std::to_string(b));
  }
}

/// Symmetric Jordan product (AB + BA) / 2.
inline HermitianOperator jordan_product(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "jordan_product");
  const ComplexMatrix ab = a.matrix() * b.matrix();
  return HermitianOperator((ab + ab.adjoint()) / 2.0);
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

/// Tr(X rho) for an arbitrary square X; complex in general.
inline Complex trace_with(const ComplexMatrix& x, const DensityOperator& rho) {
  require_same_dim(static_cast<std::size_t>(x.rows()), rho.dim(), "trace_with");
  return (x * rho.matrix()).trace();
}

inline double expectation(const HermitianOperator& a, const DensityOperator& rho) {
  return trace_with(a.matrix(), rho).real();
}

/// C_AB = |<[A,B]> / 2i|.
inline double commutator_bound(const HermitianOperator& a, const HermitianOperator& b,
                               const DensityOperator& rho) {
  require_same_dim(a.dim(), b.dim(), "commutator_bound");
  const Complex c = trace_with(commutator(a.matrix(), b.matrix()), rho);
  return std::abs(c / Complex(0.0, 2.0));
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline Moments expectation_and_variance(const HermitianOperator& a, const DensityOperator& rho) {
  require_same_dim(a.dim(), rho.dim(), "expectation_and_variance");
  const double mean = expectation(a, rho);
  const double second = trace_with(a.matrix() * a.matrix(), rho).real();
  double variance = second - mean * mean;
  if (variance < 0.0 && variance >= -tol::kVarianceClip) variance = 0.0;
  return {mean, variance};
}

struct SpectralBranch {
  double eigenvalue = 0.0;
  HermitianOperator projector;
};

struct SpectralDecomposition {
  std::vector<SpectralBranch> branches;
  double group_tol = tol::kEigenGrouping;

  std::size_t size() const { return branches.size(); }

  ComplexMatrix reconstruct() const {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim()),
                                          static_cast<Eigen::Index>(dim()));
    for (const auto& b : branches) m += b.eigenvalue * b.projector.matrix();
    return m;
  }

  std::size_t dim() const { return branches.empty() ? 0 : branches.front().projector.dim(); }

  std::vector<double> eigenvalues() const {
    std::vector<double> out;
    out.reserve(branches.size());
    for (const auto& b : branches) out.push_back(b.eigenvalue);
    return out;
  }
};

/// Eigen-branches sorted by descending eigenvalue; eigenvalues within
/// group_tol * (1 + |lambda|) of the branch leader share one projector.
inline SpectralDecomposition spectral_decompose(const HermitianOperator& a,
                                                double group_tol = tol::kEigenGrouping) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(a.matrix());
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::InternalNumeric, "Hermitian eigensolver did not converge");
  }
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const ComplexMatrix& vecs = eig.eigenvectors();
  const Eigen::Index n = lambda.size();

  SpectralDecomposition out;
  out.group_tol = group_tol;
  Eigen::Index i = n - 1;
  while (i >= 0) {
    const double leader = lambda(i);
    Eigen::Index j = i;
    double sum = 0.0;
    ComplexMatrix proj = ComplexMatrix::Zero(n, n);
    while (j >= 0 && std::abs(lambda(j) - leader) <= group_tol * (1.0 + std::abs(leader))) {
      proj += vecs.col(j) * vecs.col(j).adjoint();
      sum += lambda(j);
      --j;
    }
    const double mean = sum / static_cast<double>(i - j);
    out.branches.push_back({mean, HermitianOperator((proj + proj.adjoint()) / 2.0)});
    i = j;
  }
  return out;
}

/// Kronecker product, left factor (system) first.
inline ComplexMatrix tensor_product(const ComplexMatrix& x, const ComplexMatrix& y) {
  ComplexMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

enum class Subsystem { system, detector };

inline ComplexMatrix partial_trace(const ComplexMatrix& x, std::size_t d_s, std::size_t d_d,
                                   Subsystem keep) {
  const auto ds = static_cast<Eigen::Index>(d_s);
  const auto dd = static_cast<Eigen::Index>(d_d);
  if (d_s == 0 || d_d == 0 || x.rows() != x.cols() || x.rows() != ds * dd) {
    fail(ErrorKind::DimensionMismatch, "partial_trace: matrix of size " +
                                           std::to_string(x.rows()) + " does not factor as " +
                                           std::to_string(d_s) + "x" + std::to_string(d_d));
  }
  if (keep == Subsystem::system) {
    ComplexMatrix out = ComplexMatrix::Zero(ds, ds);
    for (Eigen::Index i = 0; i < ds; ++i)
      for (Eigen::Index j = 0; j < ds; ++j)
        for (Eigen::Index a = 0; a < dd; ++a) out(i, j) += x(i * dd + a, j * dd + a);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(dd, dd);
  for (Eigen::Index a = 0; a < dd; ++a)
    for (Eigen::Index b = 0; b < dd; ++b)
      for (Eigen::Index i = 0; i < ds; ++i) out(a, b) += x(i * dd + a, i * dd + b);
  return out;
}

}  // namespace qmeas
