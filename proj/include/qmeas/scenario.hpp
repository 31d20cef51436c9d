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

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmeas/error.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/philox.hpp"
#include "qmeas/random.hpp"

namespace qmeas {

/// Preparation, target observables, apparatus and value assignments.
struct Scenario {
  std::string name;
  std::string description;
  DensityOperator state;
  HermitianOperator observable_a;
  std::optional<HermitianOperator> observable_b;
  Instrument instrument;
  std::optional<IndirectModel> indirect;  // present when built from a unitary model
  ValueAssignment values_m;
  std::optional<ValueAssignment> values_m2;
  std::optional<ValueAssignment> values_mb;

  std::size_t dim() const { return state.dim(); }

  /// Cross-component checks: dimensions agree and every outcome has a value.
  void validate() const {
    const std::size_t d = state.dim();
    require_same_dim(d, observable_a.dim(), "observable_A vs state");
    if (observable_b) require_same_dim(d, observable_b->dim(), "observable_B vs state");
    require_same_dim(d, instrument.dim(), "apparatus vs state");
    auto check_labels = [&](const ValueAssignment& v, const char* what) {
      for (const auto& l : instrument.labels())
        if (!v.contains(l)) fail(ErrorKind::MissingLabel, std::string(what) + " has no value for outcome '" + l + "'");
      for (const auto& [l, value] : v.entries()) {
        (void)value;
        bool known = false;
        for (const auto& il : instrument.labels()) known = known || il == l;
        if (!known) fail(ErrorKind::UnknownLabel, std::string(what) + " names unknown outcome '" + l + "'");
      }
    };
    check_labels(values_m, "values_m");
    if (values_m2) check_labels(*values_m2, "values_m2");
    if (values_mb) check_labels(*values_mb, "values_mB");
  }
};

namespace detail {

inline void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
}

inline void hash_matrix(std::uint64_t& h, const ComplexMatrix& m) {
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  hash_bytes(h, shape, sizeof shape);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double parts[2] = {m(i, j).real(), m(i, j).imag()};
      hash_bytes(h, parts, sizeof parts);
    }
}

inline void hash_values(std::uint64_t& h, const ValueAssignment& v) {
  for (const auto& [l, x] : v.entries()) {
    hash_bytes(h, l.data(), l.size());
    hash_bytes(h, &x, sizeof x);
  }
}

}  // namespace detail

/// FNV-1a over every numeric input of the scenario.
inline std::uint64_t fingerprint(const Scenario& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  detail::hash_matrix(h, s.state.matrix());
  detail::hash_matrix(h, s.observable_a.matrix());
  if (s.observable_b) detail::hash_matrix(h, s.observable_b->matrix());
  for (const auto& set : s.instrument.outcomes()) {
    detail::hash_bytes(h, set.label.data(), set.label.size());
    for (const auto& m : set.operators) detail::hash_matrix(h, m);
  }
  detail::hash_values(h, s.values_m);
  if (s.values_m2) detail::hash_values(h, *s.values_m2);
  if (s.values_mb) detail::hash_values(h, *s.values_mb);
  return h;
}

namespace detail {

inline ValueAssignment contextual_or_indices(const Instrument& inst, const HermitianOperator& target) {
  try {
    return solve_contextual_values(inst, target);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotExpressible) throw;
  }
  std::vector<double> idx;
  for (std::size_t k = 0; k < inst.size(); ++k) idx.push_back(static_cast<double>(k));
  return ValueAssignment(inst.labels(), idx);
}

}  // namespace detail

/// Random scenario, deterministic in `seed`: Wishart state, Gaussian
/// Hermitian A and B, Haar-isometry instrument with `outcomes` single-Kraus
/// outcomes, values solved against A (resp. B) or raw outcome indices when
/// the target is outside the POM span.
inline Scenario generate_random(std::size_t dim, std::size_t outcomes, std::uint64_t seed) {
  if (dim < 2) fail(ErrorKind::InvalidArgument, "random scenarios need dim >= 2");
  if (outcomes < 1) fail(ErrorKind::InvalidArgument, "random scenarios need at least one outcome");
  PhiloxStream rng(seed);
  Scenario s;
  s.name = "random-d" + std::to_string(dim) + "-k" + std::to_string(outcomes) + "-s" + std::to_string(seed);
  s.state = random::wishart_state(rng, dim);
  s.observable_a = random::hermitian(rng, dim);
  s.observable_b = random::hermitian(rng, dim);
  s.instrument = random::isometry_instrument(rng, dim, outcomes);
  s.values_m = detail::contextual_or_indices(s.instrument, s.observable_a);
  s.values_mb = detail::contextual_or_indices(s.instrument, *s.observable_b);
  return s;
}

/// Random unitary system-detector model with a Wishart detector state and a
/// computational-basis readout labelled "0".."d_D-1".
inline IndirectModel generate_random_indirect(std::size_t system_dim, std::size_t detector_dim,
                                              std::uint64_t seed) {
  PhiloxStream rng(seed, 1);
  const ComplexMatrix u = random::haar_unitary(rng, system_dim * detector_dim);
  const DensityOperator rho_d = random::wishart_state(rng, detector_dim);
  std::vector<ComplexVector> basis;
  std::vector<std::string> labels;
  const auto dd = static_cast<Eigen::Index>(detector_dim);
  for (Eigen::Index k = 0; k < dd; ++k) {
    basis.push_back(ComplexVector::Unit(dd, k));
    labels.push_back(std::to_string(k));
  }
  return IndirectModel(system_dim, rho_d, u, std::move(basis), std::move(labels));
}

}  // namespace qmeas
