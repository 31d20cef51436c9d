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

// Command-line front end. Exit status: 0 success, 1 invalid input,
// 2 internal-consistency or numeric failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmeas/qmeas.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kInternal = 2;

int cmd_validate(const std::string& file) {
  const qmeas::Scenario s = qmeas::load_scenario(file);
  std::cout << "ok " << s.name << " d=" << s.dim() << " outcomes=" << s.instrument.size()
            << " fingerprint=" << qmeas::digest_hex(qmeas::fingerprint(s)) << "\n";
  return kOk;
}

int cmd_analyze(const std::string& file, const std::string& json_out, const std::string& csv_dir) {
  const qmeas::Scenario s = qmeas::load_scenario(file);
  const qmeas::AnalysisReport r = qmeas::analyze(s);
  std::cout << qmeas::text_report(r);
  if (!json_out.empty()) qmeas::write_file(json_out, qmeas::write_json(qmeas::report_to_json(r)));
  if (!csv_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(csv_dir);
    qmeas::write_file((fs::path(csv_dir) / "tmh_error.csv").string(), qmeas::distribution_csv(r.tmh_error));
    if (r.tmh_disturbance) {
      qmeas::write_file((fs::path(csv_dir) / "tmh_disturbance.csv").string(),
                        qmeas::distribution_csv(*r.tmh_disturbance));
    }
    for (const auto& o : r.outcomes)
      if (o.interdictive) {
        qmeas::write_file((fs::path(csv_dir) / ("interdictive_" + o.label + ".csv")).string(),
                          qmeas::distribution_csv(*o.interdictive));
      }
  }
  for (const auto& rec : r.inequalities)
    if (!rec.satisfied) {
      std::cerr << "error: universal relation " << qmeas::relation_id(rec.relation) << " violated (margin "
                << rec.margin << ")\n";
      return kInternal;
    }
  return kOk;
}

int cmd_sample(const std::string& file, std::uint64_t shots, std::uint64_t seed, const std::string& json_out) {
  const qmeas::Scenario s = qmeas::load_scenario(file);
  const qmeas::SampleRun run = qmeas::sample(s, shots, seed);
  const nlohmann::json j = qmeas::sample_to_json(run);
  if (json_out.empty()) {
    std::cout << qmeas::write_json(j);
  } else {
    qmeas::write_file(json_out, qmeas::write_json(j));
    std::cout << "wrote " << json_out << "\n";
  }
  return kOk;
}

int cmd_sweep(const std::string& file, const std::vector<double>& gs, const std::string& csv_out) {
  const qmeas::Scenario s = qmeas::load_scenario(file);
  const std::string csv = qmeas::sweep_csv(qmeas::weak_sweep(s, gs));
  if (csv_out.empty()) {
    std::cout << csv;
  } else {
    qmeas::write_file(csv_out, csv);
    std::cout << "wrote " << csv_out << "\n";
  }
  return kOk;
}

int cmd_random(std::size_t dim, std::size_t outcomes, std::size_t count, std::uint64_t seed, bool search,
               const std::string& json_out, const std::string& emit_dir, unsigned threads) {
  if (search) {
    const qmeas::ViolationSearchResult best =
        qmeas::heisenberg_form_violation_search({dim}, count, seed, outcomes);
    std::cout << "searched " << best.searched << " scenarios\n"
              << "best " << best.scenario.name << "\n"
              << "eps_A " << qmeas::format_double(best.eps_a) << "\n"
              << "eta_B " << qmeas::format_double(best.eta_b) << "\n"
              << "C_AB " << qmeas::format_double(best.commutator_bound) << "\n"
              << "eps_A*eta_B - C_AB " << qmeas::format_double(best.margin) << "\n"
              << "ozawa margin " << qmeas::format_double(best.ozawa.margin) << "\n";
    if (!emit_dir.empty()) {
      std::filesystem::create_directories(emit_dir);
      qmeas::write_file((std::filesystem::path(emit_dir) / "best.json").string(),
                        qmeas::write_json(qmeas::scenario_to_json(best.scenario)));
    }
    return best.ozawa.satisfied ? kOk : kInternal;
  }

  const qmeas::SweepResult sw = qmeas::random_sweep({dim}, count, seed, outcomes, threads);
  std::cout << "relation     evaluated  violations  min_margin\n";
  bool clean = true;
  for (qmeas::Relation r : qmeas::kAllRelations) {
    const auto it = sw.evaluated.find(r);
    if (it == sw.evaluated.end()) continue;
    const auto v = sw.violations.find(r);
    const std::size_t bad = v == sw.violations.end() ? 0 : v->second;
    clean = clean && bad == 0;
    std::cout << std::left << std::setw(13) << qmeas::relation_id(r) << std::setw(11) << it->second
              << std::setw(12) << bad << qmeas::format_double(sw.min_margin.at(r)) << "\n";
  }
  if (!json_out.empty()) qmeas::write_file(json_out, qmeas::write_json(qmeas::sweep_result_json(sw)));
  if (!emit_dir.empty()) {
    std::filesystem::create_directories(emit_dir);
    std::size_t i = 0;
    for (const auto& item : qmeas::sweep_plan({dim}, count, seed, outcomes)) {
      qmeas::write_file((std::filesystem::path(emit_dir) / ("random_" + std::to_string(i++) + ".json")).string(),
                        qmeas::write_json(qmeas::scenario_to_json(
                            qmeas::generate_random(item.dim, item.outcomes, item.seed))));
    }
  }
  return clean ? kOk : kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error, disturbance and uncertainty relations for quantum instruments"};
  app.require_subcommand(1);

  std::string file;
  std::string json_out;
  std::string csv_dir;
  std::string csv_out;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::vector<double> gs;
  std::size_t dim = 2;
  std::size_t outcomes = 2;
  std::size_t count = 1;
  bool search = false;
  std::string emit_dir;
  unsigned threads = 1;

  auto* validate = app.add_subcommand("validate", "Load and validate a scenario file");
  validate->add_option("file", file, "Scenario JSON")->required();

  auto* analyze = app.add_subcommand("analyze", "Full error/disturbance/inequality report");
  analyze->add_option("file", file, "Scenario JSON")->required();
  analyze->add_option("--json", json_out, "Write the JSON report here");
  analyze->add_option("--csv", csv_dir, "Write distribution CSVs into this directory");

  auto* sample = app.add_subcommand("sample", "Seeded Monte Carlo sampling of outcomes");
  sample->add_option("file", file, "Scenario JSON")->required();
  sample->add_option("--shots", shots, "Number of shots")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "64-bit seed")->required();
  sample->add_option("--json", json_out, "Write the JSON result here instead of stdout");

  auto* sweep = app.add_subcommand("sweep", "Weak-probe convergence to the quasiprobabilities");
  sweep->add_option("file", file, "Scenario JSON")->required();
  sweep->add_option("--g", gs, "Probe strengths in (0, 1]")->required()->delimiter(',');
  sweep->add_option("--csv", csv_out, "Write the CSV here instead of stdout");

  auto* random = app.add_subcommand("random", "Random scenarios and inequality margins");
  random->add_option("--dim", dim, "Hilbert-space dimension")->required()->check(CLI::Range(2, 64));
  random->add_option("--outcomes", outcomes, "Outcomes per instrument")->required()->check(CLI::Range(1, 4096));
  random->add_option("--count", count, "Number of scenarios")->required()->check(CLI::PositiveNumber);
  random->add_option("--seed", seed, "64-bit seed")->required();
  random->add_flag("--search-heisenberg-violation", search, "Minimize eps_A*eta_B - C_AB instead");
  random->add_option("--json", json_out, "Write the sweep summary here");
  random->add_option("--emit", emit_dir, "Write generated scenarios into this directory");
  random->add_option("--threads", threads, "Worker threads (results do not depend on this)")
      ->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(file);
    if (*analyze) return cmd_analyze(file, json_out, csv_dir);
    if (*sample) return cmd_sample(file, shots, seed, json_out);
    if (*sweep) return cmd_sweep(file, gs, csv_out);
    if (*random) return cmd_random(dim, outcomes, count, seed, search, json_out, emit_dir, threads);
  } catch (const qmeas::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qmeas::is_internal(e.kind()) ? kInternal : kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kInvalid;
}
