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
 * Scenario files and report serialization.
 *
 * Scenario files are JSON. Complex entries are [re, im] pairs (a bare
 * number is read as real); matrices are row-major nested arrays. Keys:
 *
 *   dimension, state, observable_A, observable_B (optional), apparatus,
 *   values_m, values_m2 (optional), values_mB (optional), meta (optional)
 *
 * apparatus is {"type": "kraus", "outcomes": [{"label", "kraus": [...]}]}
 * or {"type": "indirect", "unitary", "detector_state", "readout_basis",
 * "labels"}. Reports carry "schema_version": "1".
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmeas/analysis.hpp"
#include "qmeas/error.hpp"
#include "qmeas/inequalities.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/scenario.hpp"

namespace qmeas {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

namespace io_detail {

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& msg) {
  fail(ErrorKind::ParseError, where + ": " + msg);
}

inline Complex parse_complex(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  parse_fail(where, "expected [re, im]");
}

inline ComplexMatrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) parse_fail(where, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) parse_fail(where, "expected a nonempty array of rows");
  const std::size_t cols = j[0].size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      fail(ErrorKind::NotSquare, where + ": row " + std::to_string(i) + " has the wrong length");
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          parse_complex(j[i][c], where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
  }
  if (rows != cols) fail(ErrorKind::NotSquare, where + " is " + std::to_string(rows) + "x" + std::to_string(cols));
  return m;
}

inline ComplexVector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) parse_fail(where, "expected a nonempty array");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_complex(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

inline std::string parse_string(const Json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where, "expected a string");
  return j.get<std::string>();
}

inline const Json& require_key(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) parse_fail(where, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

inline ValueAssignment parse_values(const Json& j, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object mapping outcome label to number");
  ValueAssignment v;
  for (const auto& [label, x] : j.items()) {
    if (!x.is_number()) parse_fail(where + "." + label, "expected a number");
    v.set(label, x.get<double>());
  }
  return v;
}

// Adds the key to the message so errors name the offending entry.
template <typename F>
auto with_context(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + std::string(e.what()).substr(to_string(e.kind()).size() + 2));
  }
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json matrix_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json values_json(const ValueAssignment& v) {
  Json out = Json::object();
  for (const auto& [l, x] : v.entries()) out[l] = x;
  return out;
}

// JSON has no NaN or infinity; those become null.
inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <typename T>
Json optional_number(const std::optional<T>& x) {
  return x ? number(static_cast<double>(*x)) : Json(nullptr);
}

}  // namespace io_detail

inline Scenario scenario_from_json(const Json& j) {
  using namespace io_detail;
  if (!j.is_object()) parse_fail("scenario", "top level must be an object");
  Scenario s;
  if (j.contains("meta")) {
    const Json& meta = j.at("meta");
    if (!meta.is_object()) parse_fail("meta", "expected an object");
    if (meta.contains("name")) s.name = parse_string(meta.at("name"), "meta.name");
    if (meta.contains("description")) s.description = parse_string(meta.at("description"), "meta.description");
  }
  const Json& dim_j = require_key(j, "dimension", "scenario");
  if (!dim_j.is_number_integer() || dim_j.get<long long>() < 1) parse_fail("dimension", "expected a positive integer");
  const auto dim = static_cast<std::size_t>(dim_j.get<long long>());

  s.state = with_context("state", [&] { return DensityOperator(parse_matrix(require_key(j, "state", "scenario"), "state")); });
  require_same_dim(dim, s.state.dim(), "state vs dimension");
  s.observable_a = with_context("observable_A", [&] {
    return HermitianOperator(parse_matrix(require_key(j, "observable_A", "scenario"), "observable_A"));
  });
  if (j.contains("observable_B") && !j.at("observable_B").is_null()) {
    s.observable_b = with_context("observable_B", [&] {
      return HermitianOperator(parse_matrix(j.at("observable_B"), "observable_B"));
    });
  }

  const Json& app = require_key(j, "apparatus", "scenario");
  const std::string type = parse_string(require_key(app, "type", "apparatus"), "apparatus.type");
  if (type == "kraus") {
    const Json& outs = require_key(app, "outcomes", "apparatus");
    if (!outs.is_array()) parse_fail("apparatus.outcomes", "expected an array");
    std::vector<KrausSet> sets;
    for (std::size_t k = 0; k < outs.size(); ++k) {
      const std::string where = "apparatus.outcomes[" + std::to_string(k) + "]";
      KrausSet set;
      set.label = parse_string(require_key(outs[k], "label", where), where + ".label");
      const Json& ops = require_key(outs[k], "kraus", where);
      if (!ops.is_array()) parse_fail(where + ".kraus", "expected an array of matrices");
      for (std::size_t l = 0; l < ops.size(); ++l)
        set.operators.push_back(parse_matrix(ops[l], where + ".kraus[" + std::to_string(l) + "]"));
      sets.push_back(std::move(set));
    }
    s.instrument = with_context("apparatus", [&] { return Instrument(std::move(sets)); });
  } else if (type == "indirect") {
    const ComplexMatrix u = parse_matrix(require_key(app, "unitary", "apparatus"), "apparatus.unitary");
    const DensityOperator rho_d = with_context("apparatus.detector_state", [&] {
      return DensityOperator(parse_matrix(require_key(app, "detector_state", "apparatus"), "apparatus.detector_state"));
    });
    const Json& basis_j = require_key(app, "readout_basis", "apparatus");
    if (!basis_j.is_array()) parse_fail("apparatus.readout_basis", "expected an array of vectors");
    std::vector<ComplexVector> basis;
    for (std::size_t k = 0; k < basis_j.size(); ++k)
      basis.push_back(parse_vector(basis_j[k], "apparatus.readout_basis[" + std::to_string(k) + "]"));
    const Json& labels_j = require_key(app, "labels", "apparatus");
    if (!labels_j.is_array()) parse_fail("apparatus.labels", "expected an array of strings");
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < labels_j.size(); ++k)
      labels.push_back(parse_string(labels_j[k], "apparatus.labels[" + std::to_string(k) + "]"));
    s.indirect = with_context("apparatus", [&] {
      return IndirectModel(dim, rho_d, u, std::move(basis), std::move(labels));
    });
    s.instrument = with_context("apparatus", [&] { return from_indirect(*s.indirect); });
  } else {
    parse_fail("apparatus.type", "expected \"kraus\" or \"indirect\", got \"" + type + "\"");
  }

  s.values_m = parse_values(require_key(j, "values_m", "scenario"), "values_m");
  if (j.contains("values_m2")) s.values_m2 = parse_values(j.at("values_m2"), "values_m2");
  if (j.contains("values_mB")) s.values_mb = parse_values(j.at("values_mB"), "values_mB");
  s.validate();
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  if (s.name.empty()) s.name = path;
  return s;
}

inline Json scenario_to_json(const Scenario& s) {
  using namespace io_detail;
  Json j;
  j["meta"] = {{"name", s.name}, {"description", s.description}};
  j["dimension"] = s.dim();
  j["state"] = matrix_json(s.state.matrix());
  j["observable_A"] = matrix_json(s.observable_a.matrix());
  if (s.observable_b) j["observable_B"] = matrix_json(s.observable_b->matrix());
  if (s.indirect) {
    Json basis = Json::array();
    for (const auto& v : s.indirect->readout_basis()) {
      Json vj = Json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) vj.push_back(complex_json(v(i)));
      basis.push_back(std::move(vj));
    }
    j["apparatus"] = {{"type", "indirect"},
                      {"unitary", matrix_json(s.indirect->unitary())},
                      {"detector_state", matrix_json(s.indirect->detector_state().matrix())},
                      {"readout_basis", basis},
                      {"labels", s.indirect->labels()}};
  } else {
    Json outs = Json::array();
    for (const auto& set : s.instrument.outcomes()) {
      Json ops = Json::array();
      for (const auto& m : set.operators) ops.push_back(matrix_json(m));
      outs.push_back({{"label", set.label}, {"kraus", ops}});
    }
    j["apparatus"] = {{"type", "kraus"}, {"outcomes", outs}};
  }
  j["values_m"] = values_json(s.values_m);
  if (s.values_m2) j["values_m2"] = values_json(*s.values_m2);
  if (s.values_mb) j["values_mB"] = values_json(*s.values_mb);
  return j;
}

inline std::string digest_hex(std::uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
  return buf;
}

inline Json distribution_json(const QuasiDistribution& d) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < d.table.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < d.table.cols(); ++c) row.push_back(d.table(i, c));
    rows.push_back(std::move(row));
  }
  return {{"row_labels", d.row_labels},
          {"col_labels", d.col_labels},
          {"row_values", d.row_values},
          {"col_values", d.col_values},
          {"table", rows},
          {"min_entry", d.min_entry()},
          {"total", d.total()}};
}

inline Json noise_json(const NoiseReport& n) {
  return {{"value", n.value},         {"delta", n.delta},         {"first_term", n.first_term},
          {"second_term", n.second_term}, {"cross_term", n.cross_term}};
}

inline Json inequality_json(const InequalityRecord& r) {
  Json j = {{"relation", relation_id(r.relation)},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"margin", r.margin},
            {"satisfied", r.satisfied},
            {"inputs_digest", digest_hex(r.inputs_digest)}};
  if (!r.parts.empty()) {
    Json parts = Json::array();
    for (const auto& p : r.parts) {
      Json pj = {{"outcome", p.outcome}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"margin", p.margin}};
      if (!p.posterior.empty()) pj["posterior"] = p.posterior;
      parts.push_back(std::move(pj));
    }
    j["parts"] = std::move(parts);
  }
  return j;
}

inline Json report_to_json(const AnalysisReport& r) {
  using namespace io_detail;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = {{"name", r.name}, {"description", r.description}, {"fingerprint", digest_hex(r.fingerprint)},
                   {"dimension", r.dim}, {"labels", r.labels}, {"probabilities", r.probabilities}};

  Json err;
  err["delta_A"] = r.delta_a;
  err["system"] = noise_json(r.eps_sq);
  err["joint"] = optional_number(r.eps_sq_joint);
  err["quasi"] = r.eps_sq_quasi;
  err["custom_m2"] = optional_number(r.eps_sq_custom_m2);
  err["three_state_cross_term"] = {{"jordan", r.cross_term.lhs}, {"three_state", r.cross_term.rhs}};
  err["unbiased"] = r.unbiased;
  if (r.dispersion) {
    err["dispersion"] = {{"spectral", r.dispersion->spectral},
                         {"contextual", optional_number(r.dispersion->contextual)}};
  }
  err["second_moment_values"] = r.second_moment_values ? Json(*r.second_moment_values) : Json(nullptr);
  j["error"] = std::move(err);

  if (r.has_b) {
    Json dist;
    dist["delta_B"] = optional_number(r.delta_b);
    dist["system"] = noise_json(*r.eta_sq);
    dist["joint"] = optional_number(r.eta_sq_joint);
    dist["quasi"] = optional_number(r.eta_sq_quasi);
    dist["lindblad"] = optional_number(r.eta_sq_lindblad);
    dist["qnd"] = *r.qnd;
    Json lind = Json::array();
    for (const auto& l : r.lindblad)
      lind.push_back({{"outcome", l.outcome}, {"norm", l.norm}, {"expectation", l.expectation}});
    dist["lindblad_terms"] = std::move(lind);
    j["disturbance"] = std::move(dist);
    j["heisenberg_form"] = {{"margin", optional_number(r.heisenberg_form_margin)},
                            {"violated", r.heisenberg_form_violated}};
  } else {
    j["disturbance"] = nullptr;
  }

  j["tmh"] = {{"error", distribution_json(r.tmh_error)},
              {"disturbance", r.tmh_disturbance ? distribution_json(*r.tmh_disturbance) : Json(nullptr)}};

  Json outs = Json::array();
  for (const auto& o : r.outcomes) {
    Json oj = {{"label", o.label},
               {"probability", o.probability},
               {"pom_trace", o.pom_trace},
               {"null_outcome", o.null_outcome},
               {"retro_eps_A", optional_number(o.retro_eps_a)},
               {"retro_eps_B", optional_number(o.retro_eps_b)},
               {"retro_commutator_bound", optional_number(o.retro_commutator_bound)},
               {"interdictive_eta_B", optional_number(o.interdictive_eta_b)}};
    if (o.interdictive) oj["interdictive"] = distribution_json(*o.interdictive);
    outs.push_back(std::move(oj));
  }
  j["outcomes"] = std::move(outs);

  Json ineq = Json::array();
  for (const auto& rec : r.inequalities) ineq.push_back(inequality_json(rec));
  j["inequalities"] = std::move(ineq);
  return j;
}

inline Json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"standard_error", e.standard_error}, {"analytic", e.analytic}};
}

inline Json sample_to_json(const SampleRun& run) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = run.seed;
  j["shots"] = run.shots;
  j["prng"] = "philox4x32-10";
  Json counts = Json::object();
  for (std::size_t k = 0; k < run.labels.size(); ++k) counts[run.labels[k]] = run.counts[k];
  j["counts"] = std::move(counts);
  if (!run.joint_counts.empty()) {
    Json joint = Json::object();
    for (std::size_t k = 0; k < run.labels.size(); ++k) {
      Json row = Json::object();
      for (std::size_t b = 0; b < run.posterior_labels.size(); ++b) row[run.posterior_labels[b]] = run.joint_counts[k][b];
      joint[run.labels[k]] = std::move(row);
    }
    j["joint_counts"] = std::move(joint);
    j["posterior_values"] = run.posterior_values;
  }
  j["mean"] = estimate_json(run.mean);
  Json moments = Json::array();
  for (const auto& m : run.moments) moments.push_back(m ? estimate_json(*m) : Json(nullptr));
  j["moments"] = std::move(moments);
  j["eps_sq"] = run.eps_sq ? estimate_json(*run.eps_sq) : Json(nullptr);
  j["posterior_mean_B"] = run.posterior_mean_b ? estimate_json(*run.posterior_mean_b) : Json(nullptr);
  return j;
}

inline Json sweep_result_json(const SweepResult& sw) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenarios"] = sw.scenarios;
  Json rel = Json::array();
  for (Relation r : kAllRelations) {
    const auto it = sw.evaluated.find(r);
    if (it == sw.evaluated.end()) continue;
    const auto v = sw.violations.find(r);
    rel.push_back({{"relation", relation_id(r)},
                   {"evaluated", it->second},
                   {"violations", v == sw.violations.end() ? 0 : v->second},
                   {"min_margin", sw.min_margin.at(r)}});
  }
  j["relations"] = std::move(rel);
  return j;
}

/// %.17g keeps every double round-trippable and the output byte-stable.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string distribution_csv(const QuasiDistribution& d) {
  std::string out = "row_label,col_label,row_value,col_value,weight\n";
  for (Eigen::Index i = 0; i < d.table.rows(); ++i)
    for (Eigen::Index c = 0; c < d.table.cols(); ++c) {
      const auto ii = static_cast<std::size_t>(i);
      const auto cc = static_cast<std::size_t>(c);
      out += csv_field(d.row_labels[ii]) + "," + csv_field(d.col_labels[cc]) + "," + format_double(d.row_values[ii]) +
             "," + format_double(d.col_values[cc]) + "," + format_double(d.table(i, c)) + "\n";
    }
  return out;
}

/// One row per (g, distribution); fitted slopes come last with g = "slope".
inline std::string sweep_csv(const WeakSweep& sw) {
  std::string out = "g,error,distribution\n";
  for (const auto& row : sw.rows) out += format_double(row.g) + "," + format_double(row.error_distance) + ",error\n";
  for (const auto& row : sw.rows)
    if (row.disturbance_distance)
      out += format_double(row.g) + "," + format_double(*row.disturbance_distance) + ",disturbance\n";
  out += "slope," + format_double(sw.error_slope) + ",error\n";
  if (sw.disturbance_slope) out += "slope," + format_double(*sw.disturbance_slope) + ",disturbance\n";
  return out;
}

inline std::string write_json(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorKind::InvalidArgument, "write to '" + path + "' failed");
}

namespace io_detail {

inline std::string fixed(double x, int prec = 10) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

inline std::string opt(const std::optional<double>& x) { return x ? fixed(*x) : "-"; }

}  // namespace io_detail

inline std::string text_report(const AnalysisReport& r) {
  using io_detail::fixed;
  using io_detail::opt;
  std::ostringstream os;
  os << "scenario     " << r.name << "  (d=" << r.dim << ", " << r.labels.size() << " outcomes, fingerprint "
     << digest_hex(r.fingerprint) << ")\n";
  os << "\noutcome      p_k           Tr P_k        retro eps_A   retro eps_B   interd eta_B  retro C\n";
  for (const auto& o : r.outcomes) {
    os << std::left << std::setw(13) << o.label << std::setw(14) << fixed(o.probability) << std::setw(14)
       << fixed(o.pom_trace) << std::setw(14) << opt(o.retro_eps_a) << std::setw(14) << opt(o.retro_eps_b)
       << std::setw(14) << opt(o.interdictive_eta_b) << opt(o.retro_commutator_bound)
       << (o.null_outcome ? "  (null outcome)" : "") << "\n";
  }
  os << "\nerror        delta_A " << fixed(r.delta_a) << "  eps^2 system " << fixed(r.eps_sq.value) << "  quasi "
     << fixed(r.eps_sq_quasi) << "  joint " << opt(r.eps_sq_joint) << "\n";
  os << "             unbiased " << (r.unbiased ? "yes" : "no");
  if (r.dispersion) os << "  dispersion " << fixed(r.dispersion->spectral);
  if (r.eps_sq_custom_m2) os << "  eps^2 with values_m2 " << fixed(*r.eps_sq_custom_m2);
  os << "\n";
  if (r.has_b) {
    os << "disturbance  delta_B " << opt(r.delta_b) << "  eta^2 system " << fixed(r.eta_sq->value) << "  quasi "
       << opt(r.eta_sq_quasi) << "  Lindblad " << opt(r.eta_sq_lindblad) << "  joint " << opt(r.eta_sq_joint) << "\n";
    os << "             QND " << (*r.qnd ? "yes" : "no") << "  eps_A*eta_B - C " << opt(r.heisenberg_form_margin)
       << (r.heisenberg_form_violated ? "  (below the preparation bound)" : "") << "\n";
  }
  os << "             min TMH error weight " << fixed(r.tmh_error.min_entry());
  if (r.tmh_disturbance) os << "  min TMH disturbance weight " << fixed(r.tmh_disturbance->min_entry());
  os << "\n\nrelation     lhs           rhs           margin        ok\n";
  for (const auto& rec : r.inequalities) {
    os << std::left << std::setw(13) << relation_id(rec.relation) << std::setw(14) << fixed(rec.lhs) << std::setw(14)
       << fixed(rec.rhs) << std::setw(14) << fixed(rec.margin) << (rec.satisfied ? "yes" : "NO") << "\n";
  }
  return os.str();
}

}  // namespace qmeas
