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
 * Quantum instruments: one Kraus family per detector outcome, the POM they
 * induce, and value assignments (contextual values) over outcome labels.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmeas/error.hpp"
#include "qmeas/operator.hpp"

namespace qmeas {

namespace tol {
inline constexpr double kCompleteness = 1e-9;
inline constexpr double kPomPositivity = 1e-10;
inline constexpr double kUnitary = 1e-9;
inline constexpr double kDetectorBranch = 1e-12;
inline constexpr double kContextualResidual = 1e-8;
}  // namespace tol

struct KrausSet {
  std::string label;
  std::vector<ComplexMatrix> operators;
};

/// Real value per outcome label.
class ValueAssignment {
 public:
  ValueAssignment() = default;

  ValueAssignment(const std::vector<std::string>& labels, const std::vector<double>& values) {
    if (labels.size() != values.size()) {
      fail(ErrorKind::DimensionMismatch, "value assignment: label/value count mismatch");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) set(labels[i], values[i]);
  }

  void set(const std::string& label, double value) {
    if (!std::isfinite(value)) fail(ErrorKind::NonFinite, "value for '" + label + "' is not finite");
    values_[label] = value;
  }

  bool contains(const std::string& label) const { return values_.count(label) != 0; }

  double at(const std::string& label) const {
    auto it = values_.find(label);
    if (it == values_.end()) fail(ErrorKind::MissingLabel, "no value assigned to outcome '" + label + "'");
    return it->second;
  }

  /// Values ordered by the given labels.
  std::vector<double> ordered(const std::vector<std::string>& labels) const {
    std::vector<double> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(at(l));
    return out;
  }

  ValueAssignment squared() const {
    ValueAssignment out;
    for (const auto& [l, v] : values_) out.values_[l] = v * v;
    return out;
  }

  const std::map<std::string, double>& entries() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Validated instrument; immutable. Outcomes keep their declared order.
class Instrument {
 public:
  Instrument() = default;

  explicit Instrument(std::vector<KrausSet> sets) : outcomes_(std::move(sets)) {
    if (outcomes_.empty()) fail(ErrorKind::InvalidArgument, "instrument has no outcomes");
    std::set<std::string> seen;
    std::optional<Eigen::Index> dim;
    for (const auto& s : outcomes_) {
      if (!seen.insert(s.label).second) fail(ErrorKind::DuplicateLabel, "outcome label '" + s.label + "' repeated");
      if (s.operators.empty()) fail(ErrorKind::EmptyKrausSet, "outcome '" + s.label + "' has no Kraus operators");
      bool nonzero = false;
      for (const auto& m : s.operators) {
        if (m.rows() != m.cols() || m.rows() == 0) {
          fail(ErrorKind::NotSquare, "Kraus operator for '" + s.label + "' is not square");
        }
        if (!dim) dim = m.rows();
        if (m.rows() != *dim) {
          fail(ErrorKind::DimensionMismatch, "Kraus operator for '" + s.label + "' has dimension " +
                                                 std::to_string(m.rows()) + ", expected " +
                                                 std::to_string(*dim));
        }
        require_finite(m, "Kraus operator");
        if (max_norm(m) > 0.0) nonzero = true;
      }
      if (!nonzero) fail(ErrorKind::EmptyKrausSet, "outcome '" + s.label + "' has only zero Kraus operators");
      labels_.push_back(s.label);
    }
    dim_ = static_cast<std::size_t>(*dim);

    ComplexMatrix total = ComplexMatrix::Zero(*dim, *dim);
    for (const auto& s : outcomes_) {
      ComplexMatrix p = ComplexMatrix::Zero(*dim, *dim);
      for (const auto& m : s.operators) p += m.adjoint() * m;
      p = (p + p.adjoint()) / 2.0;
      total += p;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(p, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -tol::kPomPositivity) {
        fail(ErrorKind::NotPositive, "POM element for '" + s.label + "' is not positive");
      }
      pom_.emplace_back(p);
    }
    const double defect = max_norm(total - ComplexMatrix::Identity(*dim, *dim));
    if (defect > tol::kCompleteness) {
      fail(ErrorKind::CompletenessViolation,
           "max |sum M^dagger M - I| = " + std::to_string(defect) + " exceeds 1e-9");
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return outcomes_.size(); }
  const std::vector<KrausSet>& outcomes() const { return outcomes_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<HermitianOperator>& pom() const { return pom_; }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return i;
    fail(ErrorKind::UnknownLabel, "instrument has no outcome '" + label + "'");
  }

  const KrausSet& outcome(const std::string& label) const { return outcomes_[index_of(label)]; }

 private:
  std::vector<KrausSet> outcomes_;
  std::vector<std::string> labels_;
  std::vector<HermitianOperator> pom_;
  std::size_t dim_ = 0;
};

inline Instrument from_kraus(std::vector<KrausSet> sets) { return Instrument(std::move(sets)); }

/// System coupled to a detector by a unitary, then read out in a detector basis.
class IndirectModel {
 public:
  IndirectModel(std::size_t system_dim, DensityOperator detector_state, ComplexMatrix unitary,
                std::vector<ComplexVector> readout_basis, std::vector<std::string> labels)
      : system_dim_(system_dim),
        detector_state_(std::move(detector_state)),
        unitary_(std::move(unitary)),
        readout_basis_(std::move(readout_basis)),
        labels_(std::move(labels)) {
    const auto dd = static_cast<Eigen::Index>(detector_state_.dim());
    const auto n = static_cast<Eigen::Index>(system_dim_) * dd;
    if (system_dim_ == 0) fail(ErrorKind::InvalidArgument, "system dimension must be positive");
    if (unitary_.rows() != n || unitary_.cols() != n) {
      fail(ErrorKind::DimensionMismatch, "unitary must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    require_finite(unitary_, "unitary");
    const double u_defect = max_norm(unitary_.adjoint() * unitary_ - ComplexMatrix::Identity(n, n));
    if (u_defect > tol::kUnitary) {
      fail(ErrorKind::NotUnitary, "max |U^dagger U - I| = " + std::to_string(u_defect));
    }
    if (readout_basis_.size() != static_cast<std::size_t>(dd)) {
      fail(ErrorKind::DimensionMismatch, "readout basis needs " + std::to_string(dd) + " vectors");
    }
    if (labels_.size() != readout_basis_.size()) {
      fail(ErrorKind::DimensionMismatch, "readout labels must match readout vectors");
    }
    std::set<std::string> seen;
    for (const auto& l : labels_)
      if (!seen.insert(l).second) fail(ErrorKind::DuplicateLabel, "readout label '" + l + "' repeated");
    ComplexMatrix gram(dd, dd);
    for (Eigen::Index i = 0; i < dd; ++i) {
      if (readout_basis_[static_cast<std::size_t>(i)].size() != dd) {
        fail(ErrorKind::DimensionMismatch, "readout vector has wrong length");
      }
      for (Eigen::Index j = 0; j < dd; ++j)
        gram(i, j) = readout_basis_[static_cast<std::size_t>(i)].dot(readout_basis_[static_cast<std::size_t>(j)]);
    }
    if (max_norm(gram - ComplexMatrix::Identity(dd, dd)) > tol::kUnitary) {
      fail(ErrorKind::NotOrthonormal, "readout basis is not orthonormal to 1e-9");
    }
  }

  std::size_t system_dim() const { return system_dim_; }
  std::size_t detector_dim() const { return detector_state_.dim(); }
  const DensityOperator& detector_state() const { return detector_state_; }
  const ComplexMatrix& unitary() const { return unitary_; }
  const std::vector<ComplexVector>& readout_basis() const { return readout_basis_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Detector observable sum_k m_k |k><k| over the readout basis.
  ComplexMatrix readout_observable(const ValueAssignment& m) const {
    const auto dd = static_cast<Eigen::Index>(detector_dim());
    ComplexMatrix out = ComplexMatrix::Zero(dd, dd);
    for (std::size_t k = 0; k < labels_.size(); ++k)
      out += m.at(labels_[k]) * readout_basis_[k] * readout_basis_[k].adjoint();
    return out;
  }

 private:
  std::size_t system_dim_;
  DensityOperator detector_state_;
  ComplexMatrix unitary_;
  std::vector<ComplexVector> readout_basis_;
  std::vector<std::string> labels_;
};

/// Kraus operators M_{k,l} = sqrt(p_l) <k|U|l> over the eigenbranches of the
/// detector state; branches with p_l <= 1e-12 are dropped.
inline Instrument from_indirect(const IndirectModel& model) {
  const auto ds = static_cast<Eigen::Index>(model.system_dim());
  const auto dd = static_cast<Eigen::Index>(model.detector_dim());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(model.detector_state().matrix());
  if (eig.info() != Eigen::Success) fail(ErrorKind::InternalNumeric, "detector eigensolver failed");
  const ComplexMatrix& u = model.unitary();

  std::vector<KrausSet> sets;
  for (std::size_t k = 0; k < model.labels().size(); ++k) {
    const ComplexVector& ket_k = model.readout_basis()[k];
    KrausSet set{model.labels()[k], {}};
    for (Eigen::Index l = dd - 1; l >= 0; --l) {
      const double p = eig.eigenvalues()(l);
      if (p <= tol::kDetectorBranch) continue;
      const ComplexVector ket_l = eig.eigenvectors().col(l);
      ComplexMatrix m = ComplexMatrix::Zero(ds, ds);
      for (Eigen::Index i = 0; i < ds; ++i)
        for (Eigen::Index j = 0; j < ds; ++j) {
          Complex acc = 0.0;
          for (Eigen::Index a = 0; a < dd; ++a)
            for (Eigen::Index b = 0; b < dd; ++b)
              acc += std::conj(ket_k(a)) * u(i * dd + a, j * dd + b) * ket_l(b);
          m(i, j) = std::sqrt(p) * acc;
        }
      set.operators.push_back(std::move(m));
    }
    sets.push_back(std::move(set));
  }
  return Instrument(std::move(sets));
}

inline std::vector<HermitianOperator> pom(const Instrument& inst) { return inst.pom(); }

/// Unnormalized post-measurement state for outcome k.
inline HermitianOperator apply_selective(const Instrument& inst, const std::string& label,
                                         const DensityOperator& rho) {
  const KrausSet& set = inst.outcome(label);
  require_same_dim(inst.dim(), rho.dim(), "apply_selective");
  ComplexMatrix out = ComplexMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const auto& m : set.operators) out += m * rho.matrix() * m.adjoint();
  return HermitianOperator((out + out.adjoint()) / 2.0);
}

inline DensityOperator apply_nonselective(const Instrument& inst, const DensityOperator& rho) {
  require_same_dim(inst.dim(), rho.dim(), "apply_nonselective");
  ComplexMatrix out = ComplexMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const auto& s : inst.outcomes())
    for (const auto& m : s.operators) out += m * rho.matrix() * m.adjoint();
  return DensityOperator(ComplexMatrix((out + out.adjoint()) / 2.0));
}

inline ComplexMatrix adjoint_apply_matrix(const KrausSet& set, const ComplexMatrix& x) {
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (const auto& m : set.operators) out += m.adjoint() * x * m;
  return out;
}

/// Heisenberg-picture operation sum_l M^dagger X M for outcome k.
inline HermitianOperator adjoint_apply(const Instrument& inst, const std::string& label,
                                       const HermitianOperator& x) {
  const KrausSet& set = inst.outcome(label);
  require_same_dim(inst.dim(), x.dim(), "adjoint_apply");
  const ComplexMatrix out = adjoint_apply_matrix(set, x.matrix());
  return HermitianOperator((out + out.adjoint()) / 2.0);
}

/// Nonselective adjoint: X' = sum_k A*_k(X).
inline HermitianOperator adjoint_nonselective(const Instrument& inst, const HermitianOperator& x) {
  require_same_dim(inst.dim(), x.dim(), "adjoint_nonselective");
  ComplexMatrix out = ComplexMatrix::Zero(x.matrix().rows(), x.matrix().cols());
  for (const auto& s : inst.outcomes()) out += adjoint_apply_matrix(s, x.matrix());
  return HermitianOperator((out + out.adjoint()) / 2.0);
}

inline HermitianOperator weighted_pom(const Instrument& inst, const std::vector<double>& weights) {
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(inst.dim()),
                                          static_cast<Eigen::Index>(inst.dim()));
  for (std::size_t k = 0; k < inst.size(); ++k) out += weights[k] * inst.pom()[k].matrix();
  return HermitianOperator(out);
}

/// A_e[m] = sum_k m_k P_k.
inline HermitianOperator effective_observable(const Instrument& inst, const ValueAssignment& m) {
  return weighted_pom(inst, m.ordered(inst.labels()));
}

inline std::vector<double> outcome_probabilities(const Instrument& inst, const DensityOperator& rho) {
  require_same_dim(inst.dim(), rho.dim(), "outcome_probabilities");
  std::vector<double> p;
  p.reserve(inst.size());
  for (const auto& pk : inst.pom()) p.push_back(expectation(pk, rho));
  return p;
}

namespace detail {

// Hermitian matrix -> real coordinates (Re and Im of every entry).
inline Eigen::VectorXd real_coordinates(const ComplexMatrix& m) {
  Eigen::VectorXd v(2 * m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    v(2 * i) = m.data()[i].real();
    v(2 * i + 1) = m.data()[i].imag();
  }
  return v;
}

}  // namespace detail

/// Minimum-norm least-squares solution of sum_k m_k P_k = target.
///
/// Throws NotExpressible when the residual max-norm exceeds 1e-8.
inline std::vector<double> solve_contextual_values(std::span<const HermitianOperator> pom_elements,
                                                   const HermitianOperator& target) {
  if (pom_elements.empty()) fail(ErrorKind::InvalidArgument, "empty POM");
  for (const auto& p : pom_elements) require_same_dim(p.dim(), target.dim(), "solve_contextual_values");

  const Eigen::Index rows = 2 * static_cast<Eigen::Index>(target.dim() * target.dim());
  Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(pom_elements.size()));
  for (std::size_t k = 0; k < pom_elements.size(); ++k)
    design.col(static_cast<Eigen::Index>(k)) = detail::real_coordinates(pom_elements[k].matrix());
  const Eigen::VectorXd rhs = detail::real_coordinates(target.matrix());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  const Eigen::VectorXd solution = svd.solve(rhs);

  ComplexMatrix built = ComplexMatrix::Zero(target.matrix().rows(), target.matrix().cols());
  for (std::size_t k = 0; k < pom_elements.size(); ++k)
    built += solution(static_cast<Eigen::Index>(k)) * pom_elements[k].matrix();
  const double residual = max_norm(built - target.matrix());
  if (!(residual <= tol::kContextualResidual)) {
    fail(ErrorKind::NotExpressible,
         "target is outside the POM span (residual " + std::to_string(residual) + ")");
  }
  return {solution.data(), solution.data() + solution.size()};
}

inline ValueAssignment solve_contextual_values(const Instrument& inst, const HermitianOperator& target) {
  return ValueAssignment(inst.labels(), solve_contextual_values(std::span(inst.pom()), target));
}

/// Two-outcome qubit POM P_pm = (I pm cos(theta) sigma_z) / 2 with Kraus
/// operators sqrt(P_pm), labelled "+" and "-".
inline Instrument theta_pom_instrument(double theta) {
  const double c = std::cos(theta);
  ComplexMatrix mp = ComplexMatrix::Zero(2, 2);
  ComplexMatrix mm = ComplexMatrix::Zero(2, 2);
  mp(0, 0) = std::sqrt((1.0 + c) / 2.0);
  mp(1, 1) = std::sqrt((1.0 - c) / 2.0);
  mm(0, 0) = std::sqrt((1.0 - c) / 2.0);
  mm(1, 1) = std::sqrt((1.0 + c) / 2.0);
  return Instrument({{"+", {mp}}, {"-", {mm}}});
}

/// Projective measurement in the computational basis, outcomes "0".."d-1".
inline Instrument computational_instrument(std::size_t d) {
  std::vector<KrausSet> sets;
  const auto n = static_cast<Eigen::Index>(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m(i, i) = 1.0;
    sets.push_back({std::to_string(i), {m}});
  }
  return Instrument(std::move(sets));
}

}  // namespace qmeas
