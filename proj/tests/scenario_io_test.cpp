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

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace qmeas {
namespace {

using testing::kind_of;

const std::vector<std::string> kBundled = {"theta_pom.json", "theta_pom_sigmax.json", "projective_cnot.json",
                                           "qnd.json", "pom_diagonal.json"};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(ScenarioIo, BundledScenariosLoadAndRoundTrip) {
  for (const auto& name : kBundled) {
    const Scenario s = testing::load_bundled(name);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(fingerprint(s), fingerprint(back)) << name;
    EXPECT_EQ(s.indirect.has_value(), back.indirect.has_value()) << name;
  }
}

TEST(ScenarioIo, IndirectApparatusBuildsInstrument) {
  const Scenario s = testing::load_bundled("projective_cnot.json");
  ASSERT_TRUE(s.indirect.has_value());
  EXPECT_EQ(s.instrument.labels(), (std::vector<std::string>{"0", "1"}));
  EXPECT_LT(max_norm(s.instrument.pom()[0].matrix() - testing::diag2(1.0, 0.0)), 1e-12);
}

TEST(ScenarioIo, BareNumbersAreRealEntries) {
  Json j = scenario_to_json(testing::load_bundled("theta_pom.json"));
  j["observable_A"] = Json::parse("[[1, 0], [0, -1]]");
  EXPECT_LT(max_norm(scenario_from_json(j).observable_a.matrix() - pauli::z().matrix()), 1e-15);
}

class ScenarioErrors : public ::testing::Test {
 protected:
  Json base = scenario_to_json(testing::load_bundled("theta_pom.json"));
  ErrorKind kind(const Json& j) {
    return kind_of([&] { scenario_from_json(j); });
  }
};

TEST_F(ScenarioErrors, MalformedText) {
  EXPECT_EQ(kind_of([] { parse_scenario("{\"dimension\": 2, "); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { load_scenario("/nonexistent/scenario.json"); }), ErrorKind::ParseError);
}

TEST_F(ScenarioErrors, MissingKeysAndWrongTypes) {
  Json j = base;
  j.erase("values_m");
  EXPECT_EQ(kind(j), ErrorKind::ParseError);
  j = base;
  j["dimension"] = "two";
  EXPECT_EQ(kind(j), ErrorKind::ParseError);
  j = base;
  j["state"][0][0] = "x";
  EXPECT_EQ(kind(j), ErrorKind::ParseError);
  j = base;
  j["apparatus"]["type"] = "povm";
  EXPECT_EQ(kind(j), ErrorKind::ParseError);
}

TEST_F(ScenarioErrors, PhysicalValidation) {
  Json j = base;
  j["state"][0][0] = {0.9, 0.0};
  EXPECT_EQ(kind(j), ErrorKind::TraceNotOne);
  j = base;
  j["observable_A"][0][1] = {0.0, 1.0};
  EXPECT_EQ(kind(j), ErrorKind::NotHermitian);
  j = base;
  j["apparatus"]["outcomes"][0]["kraus"][0][0][0] = {0.5, 0.0};
  EXPECT_EQ(kind(j), ErrorKind::CompletenessViolation);
  j = base;
  j["state"][0].push_back({0.0, 0.0});
  EXPECT_EQ(kind(j), ErrorKind::NotSquare);
  j = base;
  j["dimension"] = 3;
  EXPECT_EQ(kind(j), ErrorKind::DimensionMismatch);
}

TEST_F(ScenarioErrors, LabelValidation) {
  Json j = base;
  j["values_m"].erase("-");
  EXPECT_EQ(kind(j), ErrorKind::MissingLabel);
  j = base;
  j["values_m"]["extra"] = 1.0;
  EXPECT_EQ(kind(j), ErrorKind::UnknownLabel);
  j = base;
  j["apparatus"]["outcomes"][1]["label"] = "+";
  EXPECT_EQ(kind(j), ErrorKind::DuplicateLabel);
}

TEST_F(ScenarioErrors, MessagesNameTheEntry) {
  Json j = base;
  j["state"][0][0] = {0.9, 0.0};
  try {
    scenario_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("state"), std::string::npos) << e.what();
  }
}

TEST(Reports, SchemaVersionAndDigest) {
  const Scenario s = testing::load_bundled("theta_pom.json");
  const Json r = report_to_json(analyze(s));
  EXPECT_EQ(r.at("schema_version"), "1");
  EXPECT_EQ(r.at("scenario").at("fingerprint"), digest_hex(fingerprint(s)));
  const Json sm = sample_to_json(sample(s, 100, 1));
  EXPECT_EQ(sm.at("schema_version"), "1");
}

TEST(Reports, AnalysisJsonIsByteStable) {
  const Scenario s = testing::load_bundled("projective_cnot.json");
  EXPECT_EQ(write_json(report_to_json(analyze(s))), write_json(report_to_json(analyze(s))));
}

TEST(Reports, DistributionCsvColumns) {
  const Scenario s = testing::load_bundled("theta_pom.json");
  const QuasiDistribution d = tmh_error_distribution(s.state, s.observable_a, s.instrument, s.values_m);
  const auto lines = lines_of(distribution_csv(d));
  ASSERT_EQ(lines.size(), 1u + d.row_labels.size() * d.col_labels.size());
  EXPECT_EQ(lines[0], "row_label,col_label,row_value,col_value,weight");
  double total = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto last = lines[i].rfind(',');
    total += std::stod(lines[i].substr(last + 1));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Reports, CsvQuotesAwkwardLabels) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
}

TEST(Reports, SweepCsvEndsWithSlopes) {
  const Scenario s = testing::load_bundled("theta_pom_sigmax.json");
  const auto lines = lines_of(sweep_csv(weak_sweep(s, {0.05, 0.1, 0.2})));
  ASSERT_EQ(lines.size(), 1u + 3u + 3u + 2u);
  EXPECT_EQ(lines[0], "g,error,distribution");
  EXPECT_EQ(lines[lines.size() - 2].rfind("slope,", 0), 0u);
  EXPECT_EQ(lines.back().rfind("slope,", 0), 0u);
  EXPECT_NE(lines.back().find("disturbance"), std::string::npos);
}

TEST(Reports, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 12345.678}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

}  // namespace
}  // namespace qmeas
