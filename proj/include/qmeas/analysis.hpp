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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qmeas/error.hpp"
#include "qmeas/inequalities.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/metrics.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/philox.hpp"
#include "qmeas/quasiprob.hpp"
#include "qmeas/retrodiction.hpp"
#include "qmeas/scenario.hpp"

namespace qmeas {

namespace tol {
inline constexpr double kPictureAgreement = 1e-9;
}  // namespace tol

struct LindbladEntry {
  std::string outcome;
  double norm = 0.0;         // max-norm of L_k(B)
  double expectation = 0.0;  // <L_k(B)>
};

/// Single-outcome data. Fields needing B are absent without it; a null
/// outcome carries only its label, probability and trace.
struct OutcomeReport {
  std::string label;
  double probability = 0.0;
  double pom_trace = 0.0;
  bool null_outcome = false;
  std::optional<double> retro_eps_a;
  std::optional<double> retro_eps_b;
  std::optional<double> retro_commutator_bound;
  std::optional<double> interdictive_eta_b;
  std::optional<QuasiDistribution> interdictive;
};

struct AnalysisReport {
  std::string name;
  std::string description;
  std::uint64_t fingerprint = 0;
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::vector<double> probabilities;

  double delta_a = 0.0;
  NoiseReport eps_sq;
  std::optional<double> eps_sq_joint;
  double eps_sq_quasi = 0.0;
  std::optional<double> eps_sq_custom_m2;  // system picture with the file's values_m2
  CrossTermCheck cross_term;
  bool unbiased = false;
  std::optional<DispersionForms> dispersion;
  std::optional<std::vector<double>> second_moment_values;  // m^(2) solving A_e[m^(2)] = A^2

  bool has_b = false;
  std::optional<double> delta_b;
  std::optional<NoiseReport> eta_sq;
  std::optional<double> eta_sq_joint;
  std::optional<double> eta_sq_quasi;
  std::optional<double> eta_sq_lindblad;
  std::optional<bool> qnd;
  std::vector<LindbladEntry> lindblad;

  QuasiDistribution tmh_error;
  std::optional<QuasiDistribution> tmh_disturbance;

  std::vector<OutcomeReport> outcomes;
  std::vector<InequalityRecord> inequalities;

  std::optional<double> heisenberg_form_margin;  // eps_A eta_B - C_AB
  bool heisenberg_form_violated = false;
};

namespace detail {

inline void require_agreement(double x, double y, const char* what) {
  if (std::abs(x - y) > tol::kPictureAgreement * std::max(1.0, std::abs(x))) {
    fail(ErrorKind::InternalConsistency,
         std::string(what) + " disagree: " + std::to_string(x) + " vs " + std::to_string(y));
  }
}

inline std::optional<std::vector<double>> try_contextual(const Instrument& inst, const HermitianOperator& target) {
  try {
    return solve_contextual_values(std::span(inst.pom()), target);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotExpressible) throw;
  }
  return std::nullopt;
}

inline HermitianOperator power(const HermitianOperator& a, int n) {
  const auto d = static_cast<Eigen::Index>(a.dim());
  ComplexMatrix out = ComplexMatrix::Identity(d, d);
  for (int i = 0; i < n; ++i) out = out * a.matrix();
  return HermitianOperator(out);
}

}  // namespace detail

/// Every metric of the scenario. Throws InternalConsistency when the
/// system, joint and quasiprobability forms of eps^2 or eta^2 disagree.
inline AnalysisReport analyze(const Scenario& s) {
  s.validate();
  const Instrument& inst = s.instrument;
  const HermitianOperator& a = s.observable_a;
  const DensityOperator& rho = s.state;

  AnalysisReport r;
  r.name = s.name;
  r.description = s.description;
  r.fingerprint = fingerprint(s);
  r.dim = s.dim();
  r.labels = inst.labels();
  r.probabilities = outcome_probabilities(inst, rho);

  r.delta_a = delta_A(inst, s.values_m, a, rho);
  r.eps_sq = epsilon_sq_system(inst, s.values_m, a, rho);
  if (s.values_m2) r.eps_sq_custom_m2 = epsilon_sq_system(inst, s.values_m, a, rho, s.values_m2).value;
  r.tmh_error = tmh_error_distribution(rho, a, inst, s.values_m);
  r.eps_sq_quasi = quasi_mean_squared_difference(r.tmh_error);
  detail::require_agreement(r.eps_sq.value, r.eps_sq_quasi, "system and quasiprobability eps^2");
  if (s.indirect) {
    r.eps_sq_joint = epsilon_sq_joint(*s.indirect, s.values_m, a, rho);
    detail::require_agreement(r.eps_sq.value, *r.eps_sq_joint, "system and joint eps^2");
  }
  r.cross_term = three_state_cross_term(inst, s.values_m, a, rho);
  r.unbiased = is_unbiased(inst, s.values_m, a);
  if (r.unbiased) {
    r.dispersion = unbiased_dispersion_forms(inst, s.values_m, a, rho);
    detail::require_agreement(r.eps_sq.value, r.dispersion->spectral, "eps^2 and unbiased dispersion");
  }
  r.second_moment_values = detail::try_contextual(inst, detail::power(a, 2));

  if (s.observable_b) {
    const HermitianOperator& b = *s.observable_b;
    r.has_b = true;
    r.delta_b = delta_B(inst, b, rho);
    r.eta_sq = eta_sq_system(inst, b, rho);
    r.tmh_disturbance = tmh_disturbance_distribution(rho, b, inst);
    r.eta_sq_quasi = quasi_mean_squared_difference(*r.tmh_disturbance);
    detail::require_agreement(r.eta_sq->value, *r.eta_sq_quasi, "system and quasiprobability eta^2");
    r.eta_sq_lindblad = eta_sq_lindblad(inst, b, rho);
    detail::require_agreement(r.eta_sq->value, *r.eta_sq_lindblad, "system and Lindblad eta^2");
    if (s.indirect) {
      r.eta_sq_joint = eta_sq_joint(*s.indirect, b, rho);
      detail::require_agreement(r.eta_sq->value, *r.eta_sq_joint, "system and joint eta^2");
    }
    r.qnd = is_qnd(inst, b);
    for (const auto& label : inst.labels()) {
      const HermitianOperator l = lindblad_decomposition(inst, label, b).lindblad_part;
      r.lindblad.push_back({label, max_norm(l.matrix()), expectation(l, rho)});
    }
    double ea = std::sqrt(r.eps_sq.value);
    double hb = std::sqrt(r.eta_sq->value);
    r.heisenberg_form_margin = ea * hb - commutator_bound(a, b, rho);
    r.heisenberg_form_violated = *r.heisenberg_form_margin < -tol::kSatisfied;
  }

  for (std::size_t k = 0; k < inst.size(); ++k) {
    OutcomeReport o;
    o.label = inst.labels()[k];
    o.probability = r.probabilities[k];
    o.pom_trace = inst.pom()[k].matrix().trace().real();
    o.null_outcome = !(o.pom_trace > tol::kNullOutcome);
    if (!o.null_outcome) {
      o.retro_eps_a = retrodictive_error(inst, o.label, a);
      if (s.observable_b) {
        const HermitianOperator& b = *s.observable_b;
        o.retro_eps_b = retrodictive_error(inst, o.label, b);
        o.retro_commutator_bound = retrodictive_commutator_bound(inst, o.label, a, b);
        o.interdictive = interdictive_joint_distribution(inst, o.label, b);
        o.interdictive_eta_b = std::sqrt(std::max(0.0, quasi_mean_squared_difference(*o.interdictive)));
      }
    }
    r.outcomes.push_back(std::move(o));
  }

  r.inequalities = evaluate_all(s);
  return r;
}

/// Mean and standard error of a per-shot statistic.
struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  double analytic = 0.0;
};

struct SampleRun {
  std::uint64_t seed = 0;
  std::uint64_t shots = 0;
  std::vector<std::string> labels;
  std::vector<std::uint64_t> counts;
  // Present with B: counts over (outcome, posterior branch of B).
  std::vector<std::string> posterior_labels;
  std::vector<double> posterior_values;
  std::vector<std::vector<std::uint64_t>> joint_counts;

  Estimate mean;
  std::vector<std::optional<Estimate>> moments;  // n = 1..4 via m^(n) when A^n is expressible
  std::optional<Estimate> eps_sq;                 // sum_k (m_k^2 - m^(2)_k) p_k
  std::optional<Estimate> posterior_mean_b;
};

/// Uniform double in [0, 1) for one shot: Philox keyed by the seed with the
/// shot index in the counter, so shots are independent of evaluation order.
inline double shot_uniform(std::uint64_t seed, std::uint64_t shot) {
  const PhiloxCounter out = philox4x32_10(
      {static_cast<std::uint32_t>(shot), static_cast<std::uint32_t>(shot >> 32), 0u, 0u},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Smallest index whose cumulative weight exceeds u; round-off in the final
/// partial sum falls back to the last positive cell.
inline std::size_t inverse_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  if (it != cdf.end()) return static_cast<std::size_t>(it - cdf.begin());
  std::size_t i = cdf.size() - 1;
  while (i > 0 && cdf[i] == cdf[i - 1]) --i;
  return i;
}

namespace detail {

inline Estimate weighted_estimate(const std::vector<double>& per_outcome, const std::vector<double>& freq,
                                  double shots, double analytic) {
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < freq.size(); ++k) {
    mean += per_outcome[k] * freq[k];
    second += per_outcome[k] * per_outcome[k] * freq[k];
  }
  const double var = std::max(0.0, second - mean * mean);
  // Unbiased sample variance over shots, divided by shots.
  const double denom = shots > 1.0 ? shots - 1.0 : 1.0;
  return {mean, std::sqrt(var / denom), analytic};
}

}  // namespace detail

/// Draws `shots` outcomes i.i.d. from p_k, or (k, b') from
/// Tr(Pi_b' A_k(rho)) when B is present.
inline SampleRun sample(const Scenario& s, std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) fail(ErrorKind::InvalidArgument, "shots must be at least 1");
  s.validate();
  const Instrument& inst = s.instrument;
  const DensityOperator& rho = s.state;
  const std::size_t n_out = inst.size();

  SampleRun run;
  run.seed = seed;
  run.shots = shots;
  run.labels = inst.labels();
  run.counts.assign(n_out, 0);

  std::vector<double> weights;
  std::size_t n_post = 1;
  std::optional<SpectralDecomposition> spec_b;
  if (s.observable_b) {
    spec_b = spectral_decompose(*s.observable_b);
    n_post = spec_b->size();
    run.posterior_labels = detail::branch_labels("b'", n_post);
    run.posterior_values = spec_b->eigenvalues();
    for (std::size_t k = 0; k < n_out; ++k) {
      const HermitianOperator after = apply_selective(inst, inst.labels()[k], rho);
      for (const auto& br : spec_b->branches)
        weights.push_back(std::max(0.0, (br.projector.matrix() * after.matrix()).trace().real()));
    }
    run.joint_counts.assign(n_out, std::vector<std::uint64_t>(n_post, 0));
  } else {
    for (double p : outcome_probabilities(inst, rho)) weights.push_back(std::max(0.0, p));
  }
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = acc += weights[i];
  if (!(acc > 0.0)) fail(ErrorKind::InternalNumeric, "outcome distribution has no mass");

  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    const std::size_t cell = inverse_cdf(cdf, shot_uniform(seed, shot));
    ++run.counts[cell / n_post];
    if (spec_b) ++run.joint_counts[cell / n_post][cell % n_post];
  }

  const double n = static_cast<double>(shots);
  std::vector<double> freq(n_out);
  for (std::size_t k = 0; k < n_out; ++k) freq[k] = static_cast<double>(run.counts[k]) / n;
  const std::vector<double> p = outcome_probabilities(inst, rho);
  const std::vector<double> m = s.values_m.ordered(inst.labels());
  auto analytic = [&](const std::vector<double>& v) {
    double t = 0.0;
    for (std::size_t k = 0; k < n_out; ++k) t += v[k] * p[k];
    return t;
  };
  run.mean = detail::weighted_estimate(m, freq, n, analytic(m));

  for (int order = 1; order <= 4; ++order) {
    const auto mn = detail::try_contextual(inst, detail::power(s.observable_a, order));
    if (mn) {
      run.moments.push_back(detail::weighted_estimate(*mn, freq, n,
                                                      expectation(detail::power(s.observable_a, order), rho)));
    } else {
      run.moments.emplace_back(std::nullopt);
    }
  }

  if (const auto m2 = detail::try_contextual(inst, detail::power(s.observable_a, 2))) {
    std::vector<double> excess(n_out);
    for (std::size_t k = 0; k < n_out; ++k) excess[k] = m[k] * m[k] - (*m2)[k];
    run.eps_sq = detail::weighted_estimate(excess, freq, n, analytic(excess));
  }

  if (spec_b) {
    std::vector<double> post_freq(n_post, 0.0);
    for (std::size_t k = 0; k < n_out; ++k)
      for (std::size_t j = 0; j < n_post; ++j) post_freq[j] += static_cast<double>(run.joint_counts[k][j]) / n;
    run.posterior_mean_b = detail::weighted_estimate(run.posterior_values, post_freq, n,
                                                     expectation(*s.observable_b, apply_nonselective(inst, rho)));
  }
  return run;
}

struct WeakSweepRow {
  double g = 0.0;
  double error_distance = 0.0;                     // vs TMH error distribution
  std::optional<double> disturbance_distance;      // vs TMH disturbance distribution
};

struct WeakSweep {
  std::vector<WeakSweepRow> rows;
  double error_slope = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> disturbance_slope;
};

/// Least-squares slope of log(y) against log(x); NaN when fewer than two
/// points or any y is at round-off level (<= 1e-12).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || x.size() != y.size()) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 1e-12) || !(x[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

/// Max-norm distance between weak-probe and TMH distributions per strength.
inline WeakSweep weak_sweep(const Scenario& s, const std::vector<double>& g_list) {
  if (g_list.empty()) fail(ErrorKind::InvalidArgument, "sweep needs at least one strength");
  for (double g : g_list)
    if (!(g > 0.0 && g <= 1.0)) fail(ErrorKind::InvalidStrength, "probe strength must lie in (0, 1]");
  s.validate();
  const QuasiDistribution tmh_err = tmh_error_distribution(s.state, s.observable_a, s.instrument, s.values_m);
  std::optional<QuasiDistribution> tmh_dist;
  if (s.observable_b) tmh_dist = tmh_disturbance_distribution(s.state, *s.observable_b, s.instrument);

  WeakSweep out;
  std::vector<double> gs, errs, dists;
  for (double g : g_list) {
    WeakSweepRow row;
    row.g = g;
    row.error_distance = max_table_distance(
        weak_probe_error_distribution(s.state, s.observable_a, s.instrument, s.values_m, g), tmh_err);
    if (tmh_dist) {
      row.disturbance_distance = max_table_distance(
          weak_probe_disturbance_distribution(s.state, *s.observable_b, s.instrument, g), *tmh_dist);
      dists.push_back(*row.disturbance_distance);
    }
    gs.push_back(g);
    errs.push_back(row.error_distance);
    out.rows.push_back(row);
  }
  out.error_slope = log_log_slope(gs, errs);
  if (tmh_dist) out.disturbance_slope = log_log_slope(gs, dists);
  return out;
}

}  // namespace qmeas
