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
 * Uncertainty relations between preparation spreads, ensemble errors and
 * disturbances, and their single-outcome counterparts.
 *
 * Every relation is evaluated as lhs >= rhs and reported with
 * margin = lhs - rhs; a record is satisfied when margin >= -1e-9.
 *
 * Ensemble relations use sigma_A, sigma_B of the preparation, eps_A from
 * values m and eps_B from values m_B on the same apparatus, eta_B from its
 * nonselective action. The estimated spread sigma_est is the standard
 * deviation of the recorded values under the outcome probabilities.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qmeas/error.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/metrics.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/philox.hpp"
#include "qmeas/retrodiction.hpp"
#include "qmeas/scenario.hpp"

namespace qmeas {

namespace tol {
inline constexpr double kSatisfied = 1e-9;
inline constexpr double kRadicandClip = 1e-12;
}  // namespace tol

enum class Relation {
  heisenberg,
  schrodinger,
  ozawa,
  hall,
  weston,
  branciard_complementarity,
  branciard_error_disturbance,
  hofmann1,
  hofmann2,
  hofmann3,
};

inline constexpr std::array<Relation, 10> kAllRelations = {
    Relation::heisenberg, Relation::schrodinger, Relation::ozawa,
    Relation::hall,       Relation::weston,      Relation::branciard_complementarity,
    Relation::branciard_error_disturbance,       Relation::hofmann1,
    Relation::hofmann2,   Relation::hofmann3,
};

inline const char* relation_id(Relation r) {
  switch (r) {
    case Relation::heisenberg: return "heisenberg";
    case Relation::schrodinger: return "schrodinger";
    case Relation::ozawa: return "ozawa";
    case Relation::hall: return "hall";
    case Relation::weston: return "weston";
    case Relation::branciard_complementarity: return "branciard_ee";
    case Relation::branciard_error_disturbance: return "branciard_ed";
    case Relation::hofmann1: return "hofmann1";
    case Relation::hofmann2: return "hofmann2";
    case Relation::hofmann3: return "hofmann3";
  }
  return "?";
}

inline std::optional<Relation> parse_relation(const std::string& id) {
  for (Relation r : kAllRelations)
    if (id == relation_id(r)) return r;
  return std::nullopt;
}

struct SubRecord {
  std::string outcome;
  std::string posterior;  // empty unless the relation is per (k, b')
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct InequalityRecord {
  Relation relation = Relation::heisenberg;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool satisfied = true;
  std::uint64_t inputs_digest = 0;
  std::vector<SubRecord> parts;
};

/// Spreads, errors and bounds shared by the ensemble relations.
struct EnsembleQuantities {
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double commutator_bound = 0.0;
  double covariance = 0.0;  // <A*B> - <A><B>
  std::optional<double> eps_a;
  std::optional<double> eps_b;
  std::optional<double> eta_b;
  std::optional<double> sigma_a_est;
  std::optional<double> sigma_b_est;
};

/// Standard deviation of the recorded values under p_k.
inline double estimate_spread(const Instrument& inst, const ValueAssignment& m, const DensityOperator& rho) {
  const std::vector<double> p = outcome_probabilities(inst, rho);
  const std::vector<double> v = m.ordered(inst.labels());
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    mean += v[k] * p[k];
    second += v[k] * v[k] * p[k];
  }
  return std::sqrt(std::max(0.0, second - mean * mean));
}

inline EnsembleQuantities ensemble_quantities(const Scenario& s) {
  EnsembleQuantities q;
  const HermitianOperator& a = s.observable_a;
  q.sigma_a = std::sqrt(expectation_and_variance(a, s.state).variance);
  q.eps_a = std::sqrt(epsilon_sq_system(s.instrument, s.values_m, a, s.state).value);
  q.sigma_a_est = estimate_spread(s.instrument, s.values_m, s.state);
  if (s.observable_b) {
    const HermitianOperator& b = *s.observable_b;
    const Moments mb = expectation_and_variance(b, s.state);
    q.sigma_b = std::sqrt(mb.variance);
    q.commutator_bound = commutator_bound(a, b, s.state);
    q.covariance = expectation(jordan_product(a, b), s.state) - expectation(a, s.state) * mb.mean;
    q.eta_b = std::sqrt(eta_sq_system(s.instrument, b, s.state).value);
    if (s.values_mb) {
      q.eps_b = std::sqrt(epsilon_sq_system(s.instrument, *s.values_mb, b, s.state).value);
      q.sigma_b_est = estimate_spread(s.instrument, *s.values_mb, s.state);
    }
  }
  return q;
}

namespace detail {

inline InequalityRecord make_record(Relation r, double lhs, double rhs, std::uint64_t digest) {
  InequalityRecord rec;
  rec.relation = r;
  rec.lhs = lhs;
  rec.rhs = rhs;
  rec.margin = lhs - rhs;
  rec.satisfied = rec.margin >= -tol::kSatisfied;
  rec.inputs_digest = digest;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
    fail(ErrorKind::InternalNumeric, std::string(relation_id(r)) + " produced a non-finite side");
  }
  return rec;
}

inline double require(const std::optional<double>& v, Relation r, const char* what) {
  if (!v) fail(ErrorKind::MissingIngredient, std::string(relation_id(r)) + " needs " + what);
  return *v;
}

// sqrt(sigma_A^2 sigma_B^2 - C^2), clamped at zero within 1e-12.
inline double branciard_root(const EnsembleQuantities& q) {
  const double radicand = q.sigma_a * q.sigma_a * q.sigma_b * q.sigma_b -
                          q.commutator_bound * q.commutator_bound;
  if (radicand >= 0.0) return std::sqrt(radicand);
  if (radicand >= -tol::kRadicandClip) return 0.0;
  fail(ErrorKind::NegativeRadicand, "sigma_A^2 sigma_B^2 - C^2 = " + std::to_string(radicand));
}

// Folds per-outcome parts into a record whose sides come from the tightest part.
inline InequalityRecord fold_parts(Relation r, std::vector<SubRecord> parts, std::uint64_t digest) {
  if (parts.empty()) fail(ErrorKind::MissingIngredient, std::string(relation_id(r)) + " has no admissible outcomes");
  const auto worst = std::min_element(parts.begin(), parts.end(),
                                      [](const SubRecord& x, const SubRecord& y) { return x.margin < y.margin; });
  InequalityRecord rec = make_record(r, worst->lhs, worst->rhs, digest);
  rec.parts = std::move(parts);
  return rec;
}

inline bool outcome_fires(const Instrument& inst, std::size_t k) {
  return inst.pom()[k].matrix().trace().real() > tol::kNullOutcome;
}

}  // namespace detail

inline bool is_applicable(Relation r, const Scenario& s) {
  switch (r) {
    case Relation::heisenberg:
    case Relation::schrodinger:
    case Relation::ozawa:
    case Relation::branciard_error_disturbance:
    case Relation::hofmann1:
    case Relation::hofmann2:
    case Relation::hofmann3:
      return s.observable_b.has_value();
    case Relation::hall:
    case Relation::weston:
    case Relation::branciard_complementarity:
      return s.observable_b.has_value() && s.values_mb.has_value();
  }
  return false;
}

inline InequalityRecord evaluate(Relation r, const Scenario& s, const EnsembleQuantities& q) {
  const std::uint64_t digest = fingerprint(s);
  if (!s.observable_b) fail(ErrorKind::MissingIngredient, std::string(relation_id(r)) + " needs observable B");
  const HermitianOperator& a = s.observable_a;
  const HermitianOperator& b = *s.observable_b;
  const double c = q.commutator_bound;

  switch (r) {
    case Relation::heisenberg:
      return detail::make_record(r, q.sigma_a * q.sigma_b, c, digest);

    case Relation::schrodinger:
      return detail::make_record(r, q.sigma_a * q.sigma_a * q.sigma_b * q.sigma_b,
                                 q.covariance * q.covariance + c * c, digest);

    case Relation::ozawa: {
      const double ea = detail::require(q.eps_a, r, "values m");
      const double hb = detail::require(q.eta_b, r, "observable B");
      return detail::make_record(r, ea * hb + ea * q.sigma_b + q.sigma_a * hb, c, digest);
    }

    case Relation::hall: {
      const double ea = detail::require(q.eps_a, r, "values m");
      const double eb = detail::require(q.eps_b, r, "values m_B");
      return detail::make_record(r, ea * eb + ea * q.sigma_b + q.sigma_a * eb, c, digest);
    }

    case Relation::weston: {
      const double ea = detail::require(q.eps_a, r, "values m");
      const double eb = detail::require(q.eps_b, r, "values m_B");
      const double sa_est = detail::require(q.sigma_a_est, r, "values m");
      const double sb_est = detail::require(q.sigma_b_est, r, "values m_B");
      return detail::make_record(r, ea * (q.sigma_b + sb_est) / 2.0 + eb * (q.sigma_a + sa_est) / 2.0, c, digest);
    }

    case Relation::branciard_complementarity:
    case Relation::branciard_error_disturbance: {
      const double ea = detail::require(q.eps_a, r, "values m");
      const double second = r == Relation::branciard_complementarity
                                ? detail::require(q.eps_b, r, "values m_B")
                                : detail::require(q.eta_b, r, "observable B");
      const double lhs = q.sigma_a * q.sigma_a * second * second + ea * ea * q.sigma_b * q.sigma_b +
                         2.0 * ea * second * detail::branciard_root(q);
      return detail::make_record(r, lhs, c * c, digest);
    }

    case Relation::hofmann1:
    case Relation::hofmann3: {
      std::vector<SubRecord> parts;
      for (std::size_t k = 0; k < s.instrument.size(); ++k) {
        if (!detail::outcome_fires(s.instrument, k)) continue;
        const std::string& label = s.instrument.labels()[k];
        const double ea = retrodictive_error(s.instrument, label, a);
        const double second = r == Relation::hofmann1 ? retrodictive_error(s.instrument, label, b)
                                                      : interdictive_disturbance(s.instrument, label, b);
        const double bound = retrodictive_commutator_bound(s.instrument, label, a, b);
        parts.push_back({label, "", ea * second, bound, ea * second - bound});
      }
      return detail::fold_parts(r, std::move(parts), digest);
    }

    case Relation::hofmann2: {
      std::vector<SubRecord> parts;
      const std::size_t branches = spectral_decompose(b).size();
      for (std::size_t k = 0; k < s.instrument.size(); ++k) {
        if (!detail::outcome_fires(s.instrument, k)) continue;
        const std::string& label = s.instrument.labels()[k];
        for (std::size_t bp = 0; bp < branches; ++bp) {
          RestrictedMetrics rm;
          try {
            rm = restricted_metrics(s.instrument, label, bp, a, b);
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::ZeroPosterior) continue;
            throw;
          }
          const double lhs = rm.eps_A() * rm.eta_B();
          const double rhs = rm.eps_A() * rm.eps_B();
          parts.push_back({label, "b'" + std::to_string(bp), lhs, rhs, lhs - rhs});
        }
      }
      return detail::fold_parts(r, std::move(parts), digest);
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown relation");
}

inline InequalityRecord evaluate(Relation r, const Scenario& s) {
  if (!is_applicable(r, s)) {
    fail(ErrorKind::MissingIngredient, std::string(relation_id(r)) + " is not applicable to this scenario");
  }
  return evaluate(r, s, ensemble_quantities(s));
}

inline std::vector<InequalityRecord> evaluate_all(const Scenario& s) {
  const EnsembleQuantities q = ensemble_quantities(s);
  std::vector<InequalityRecord> out;
  for (Relation r : kAllRelations)
    if (is_applicable(r, s)) out.push_back(evaluate(r, s, q));
  return out;
}

struct SweepResult {
  std::vector<InequalityRecord> records;
  std::map<Relation, double> min_margin;
  std::map<Relation, std::size_t> evaluated;
  std::map<Relation, std::size_t> violations;
  std::size_t scenarios = 0;
};

/// Seed and outcome count of the i-th scenario of a sweep.
struct SweepItem {
  std::size_t dim = 2;
  std::size_t outcomes = 2;
  std::uint64_t seed = 0;
};

inline std::vector<SweepItem> sweep_plan(const std::vector<std::size_t>& dims, std::size_t count,
                                         std::uint64_t seed, std::optional<std::size_t> outcomes = std::nullopt) {
  if (count < 1) fail(ErrorKind::InvalidArgument, "sweep count must be at least 1");
  if (dims.empty()) fail(ErrorKind::InvalidArgument, "sweep needs at least one dimension");
  std::vector<SweepItem> plan;
  std::uint64_t index = 0;
  for (std::size_t d : dims)
    for (std::size_t i = 0; i < count; ++i, ++index) {
      const std::uint64_t sub = subseed(seed, index);
      // Outcome counts range over 2 .. d^2 + 1, so some instruments are
      // informationally complete and admit unbiased value assignments.
      const std::size_t k = outcomes ? *outcomes : 2 + static_cast<std::size_t>(mix64(sub) % (d * d));
      plan.push_back({d, k, sub});
    }
  return plan;
}

/// Evaluates every relation on `count` random scenarios per dimension.
/// Scenario i uses subseed(seed, i); results do not depend on `threads`.
inline SweepResult random_sweep(const std::vector<std::size_t>& dims, std::size_t count, std::uint64_t seed,
                                std::optional<std::size_t> outcomes = std::nullopt, unsigned threads = 1) {
  const std::vector<SweepItem> plan = sweep_plan(dims, count, seed, outcomes);
  std::vector<std::vector<InequalityRecord>> per_item(plan.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < plan.size(); i += stride)
      per_item[i] = evaluate_all(generate_random(plan[i].dim, plan[i].outcomes, plan[i].seed));
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }

  SweepResult out;
  out.scenarios = plan.size();
  for (auto& recs : per_item)
    for (auto& rec : recs) {
      auto [it, inserted] = out.min_margin.try_emplace(rec.relation, rec.margin);
      if (!inserted) it->second = std::min(it->second, rec.margin);
      ++out.evaluated[rec.relation];
      if (!rec.satisfied) ++out.violations[rec.relation];
      out.records.push_back(std::move(rec));
    }
  return out;
}

/// Projective sigma_z apparatus with eigenvalue assignment, B = sigma_x,
/// rho = (1 + 0.8 sigma_y)/2: eps_A = 0 while C_AB = 0.8.
inline Scenario heisenberg_violation_witness() {
  Scenario s;
  s.name = "projective-sigma-z-witness";
  s.description = "Noiseless sigma_z estimate with sigma_x disturbance and <sigma_y> = 0.8";
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2) + 0.8 * pauli::y().matrix();
  s.state = DensityOperator(ComplexMatrix(rho / 2.0));
  s.observable_a = pauli::z();
  s.observable_b = pauli::x();
  s.instrument = computational_instrument(2);
  s.values_m = ValueAssignment({"0", "1"}, {1.0, -1.0});
  return s;
}

struct ViolationSearchResult {
  Scenario scenario;
  double eps_a = 0.0;
  double eta_b = 0.0;
  double commutator_bound = 0.0;
  double margin = std::numeric_limits<double>::infinity();  // eps_A eta_B - C_AB
  InequalityRecord ozawa;
  std::size_t searched = 0;
};

inline double heisenberg_form_margin(const Scenario& s, double* eps_a = nullptr, double* eta_b = nullptr,
                                     double* bound = nullptr) {
  const EnsembleQuantities q = ensemble_quantities(s);
  if (eps_a) *eps_a = *q.eps_a;
  if (eta_b) *eta_b = *q.eta_b;
  if (bound) *bound = q.commutator_bound;
  return *q.eps_a * *q.eta_b - q.commutator_bound;
}

/// Searches for the most negative eps_A eta_B - C_AB. Qubit searches always
/// include the analytic projective witness.
inline ViolationSearchResult heisenberg_form_violation_search(const std::vector<std::size_t>& dims, std::size_t count,
                                                              std::uint64_t seed,
                                                              std::optional<std::size_t> outcomes = std::nullopt) {
  std::vector<Scenario> candidates;
  if (std::find(dims.begin(), dims.end(), std::size_t{2}) != dims.end())
    candidates.push_back(heisenberg_violation_witness());
  for (const SweepItem& item : sweep_plan(dims, count, seed, outcomes))
    candidates.push_back(generate_random(item.dim, item.outcomes, item.seed));

  ViolationSearchResult best;
  for (const Scenario& s : candidates) {
    ++best.searched;
    double ea = 0.0, hb = 0.0, c = 0.0;
    const double margin = heisenberg_form_margin(s, &ea, &hb, &c);
    if (margin < best.margin) {
      best.scenario = s;
      best.margin = margin;
      best.eps_a = ea;
      best.eta_b = hb;
      best.commutator_bound = c;
    }
  }
  best.ozawa = evaluate(Relation::ozawa, best.scenario);
  return best;
}

}  // namespace qmeas
