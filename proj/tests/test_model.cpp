// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <functional>

#include "fmea/error.hpp"
#include "fmea/fixtures.hpp"
#include "fmea/text.hpp"
#include "helpers.hpp"

using namespace fmea;
using fmea::testing::sample_document;

namespace {

std::vector<std::string> codes(const ValidationResult& r) {
  std::vector<std::string> out;
  for (const auto& v : r.violations) out.push_back(v.code);
  return out;
}

}  // namespace

TEST_CASE("steps are ordered and named") {
  CHECK(kAllSteps.size() == 6);
  CHECK(step_name(StepKind::failure_locations) == "failure_locations");
  CHECK(parse_step("boundary_components") == StepKind::boundary);
  CHECK(parse_step("job_plans") == StepKind::job_plans);
  CHECK_THROWS_AS(parse_step("nope"), Error);
  CHECK_FALSE(previous_step(StepKind::boundary).has_value());
  CHECK(next_step(StepKind::boundary) == StepKind::failure_locations);
  CHECK_FALSE(next_step(StepKind::job_plans).has_value());
}

TEST_CASE("empty lists with a valid boundary validate") {
  FmeaDocument d;
  d.doc_id = "x";
  d.equipment_name = "X";
  d.short_description = "thing";
  d.boundary = {"Does things", {"Part"}};
  CHECK(validate_document(d).ok());
}

TEST_CASE("dangling mechanism ref is reported with its id") {
  auto d = sample_document();
  d.mechanisms[1].location_ref = "loc-9";
  auto r = validate_document(d);
  REQUIRE(codes(r) == std::vector<std::string>{"DANGLING_REF"});
  CHECK(r.violations[0].id == "loc-9");
}

TEST_CASE("case-insensitive duplicate components") {
  auto d = sample_document();
  d.boundary.components = {"Casing", "casing"};
  d.locations.clear();
  d.mechanisms.clear();
  d.influences.clear();
  d.tasks.clear();
  d.job_plans.clear();
  CHECK(codes(validate_document(d)) == std::vector<std::string>{"DUPLICATE_COMPONENT"});
}

TEST_CASE("single-field corruptions yield exactly the expected code") {
  using Mutation = std::pair<std::string, std::function<void(FmeaDocument&)>>;
  const std::vector<Mutation> mutations = {
      {"EMPTY_FIELD", [](FmeaDocument& d) { d.equipment_name = " "; }},
      {"EMPTY_FIELD", [](FmeaDocument& d) { d.boundary.description.clear(); }},
      {"EMPTY_FIELD", [](FmeaDocument& d) { d.locations[0].name.clear(); }},
      {"EMPTY_FIELD", [](FmeaDocument& d) { d.short_description.clear(); }},
      {"INVALID_DOC_ID", [](FmeaDocument& d) { d.doc_id = "../etc"; }},
      {"UNTRIMMED_COMPONENT", [](FmeaDocument& d) { d.boundary.components.push_back(" Shaft"); }},
      {"DUPLICATE_COMPONENT", [](FmeaDocument& d) { d.boundary.components.push_back("BEARINGS"); }},
      {"DUPLICATE_ID", [](FmeaDocument& d) { d.mechanisms.push_back(d.mechanisms[0]); }},
      {"DANGLING_REF", [](FmeaDocument& d) { d.locations[0].component_ref = "Rotor"; }},
      {"DANGLING_REF", [](FmeaDocument& d) { d.influences[0].mechanism_ref = "mech-7"; }},
      {"DANGLING_REF", [](FmeaDocument& d) { d.tasks[1].location_ref = "loc-3"; }},
      {"DANGLING_REF", [](FmeaDocument& d) { d.job_plans[0].task_refs.push_back("task-9"); }},
      {"INCONSISTENT_REF", [](FmeaDocument& d) { d.tasks[0].location_ref = "loc-2"; }},
      {"EMPTY_TASK_REFS", [](FmeaDocument& d) { d.job_plans[0].task_refs.clear(); }},
  };
  REQUIRE(validate_document(sample_document()).ok());
  for (const auto& [expected, mutate] : mutations) {
    auto d = sample_document();
    mutate(d);
    INFO(expected);
    CHECK(codes(validate_document(d)) == std::vector<std::string>{expected});
  }
}

TEST_CASE("corrupting each fixture document is caught") {
  auto set = load_fixtures(fmea::testing::fixture_dir());
  for (const auto& doc : set.documents) {
    INFO(doc.doc_id);
    CHECK(validate_document(doc).ok());
    auto d = doc;
    d.mechanisms.back().location_ref = "missing";
    CHECK(validate_document(d).has("DANGLING_REF"));
    d = doc;
    d.boundary.components.push_back(to_upper(d.boundary.components.front()));
    CHECK(validate_document(d).has("DUPLICATE_COMPONENT"));
    d = doc;
    d.tasks.front().id = d.locations.front().id;
    CHECK(validate_document(d).has("DUPLICATE_ID"));
  }
}

TEST_CASE("flatten_step_items projects in document order") {
  auto d = sample_document();
  CHECK(flatten_step_items(d, StepKind::boundary) == std::vector<std::string>{"Casing", "Impeller", "Bearings"});
  CHECK(flatten_step_items(d, StepKind::mechanisms) ==
        std::vector<std::string>{"Bearing fatigue", "Impeller erosion", "Bearing overheating"});
  CHECK(flatten_step_items(d, StepKind::tasks) ==
        std::vector<std::string>{"Check bearing temperature", "Inspect impeller"});
  CHECK(flatten_step_items(d, StepKind::job_plans) == std::vector<std::string>{"Monthly"});
  d.locations.clear();
  CHECK(flatten_step_items(d, StepKind::failure_locations).empty());
}

TEST_CASE("canonical json round-trips and rejects unknown fields") {
  auto d = sample_document();
  d.provenance = Provenance::fixture;
  auto j = to_json(d);
  CHECK(j.begin().key() == "doc_id");
  CHECK(j["locations"][0]["component_ref"] == "Bearings");
  CHECK(j["tasks"][1]["mechanism_ref"].is_null());
  CHECK(document_from_json(j) == d);
  CHECK(to_json(document_from_json(j)).dump() == j.dump());

  auto extra = j;
  extra["severity"] = 3;
  CHECK_THROWS_WITH_AS(document_from_json(extra), doctest::Contains("severity"), Error);
  auto nested = j;
  nested["locations"][0]["rpn"] = 1;
  CHECK_THROWS_AS(document_from_json(nested), Error);
  auto wrong = j;
  wrong["boundary"]["components"] = "Casing";
  CHECK_THROWS_AS(document_from_json(wrong), Error);
  try {
    document_from_json(extra);
  } catch (const Error& e) {
    CHECK(e.code() == "INVALID_DOCUMENT");
  }
}
