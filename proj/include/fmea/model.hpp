// SPDX-License-Identifier: Apache-2.0
//
// Nested FMEA document: boundary -> failure locations -> degradation
// mechanisms -> degradation influences, with preventative tasks and job
// plans hanging off that tree.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fmea {

using Json = nlohmann::ordered_json;

/// Pipeline steps in unlock order.
enum class StepKind { boundary, failure_locations, mechanisms, influences, tasks, job_plans };

inline constexpr std::array<StepKind, 6> kAllSteps = {
    StepKind::boundary, StepKind::failure_locations, StepKind::mechanisms,
    StepKind::influences, StepKind::tasks, StepKind::job_plans};

std::string_view step_name(StepKind step);
/// Accepts the canonical names plus "boundary_components". Throws Error
/// UNKNOWN_STEP otherwise.
StepKind parse_step(std::string_view name);
std::optional<StepKind> previous_step(StepKind step);
std::optional<StepKind> next_step(StepKind step);
size_t step_index(StepKind step);

enum class Provenance { authored, generated, fixture };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

struct EquipmentBoundary {
  std::string description;
  std::vector<std::string> components;

  bool operator==(const EquipmentBoundary&) const = default;
};

struct FailureLocation {
  std::string id;
  std::string name;
  std::optional<std::string> component_ref;

  bool operator==(const FailureLocation&) const = default;
};

struct DegradationMechanism {
  std::string id;
  std::string name;
  std::string location_ref;

  bool operator==(const DegradationMechanism&) const = default;
};

struct DegradationInfluence {
  std::string id;
  std::string name;
  std::string mechanism_ref;

  bool operator==(const DegradationInfluence&) const = default;
};

struct PreventativeTask {
  std::string id;
  std::string description;
  std::string location_ref;
  std::optional<std::string> mechanism_ref;
  std::optional<std::string> influence_ref;

  bool operator==(const PreventativeTask&) const = default;
};

struct JobPlan {
  std::string id;
  std::string name;
  std::vector<std::string> task_refs;
  std::string schedule;

  bool operator==(const JobPlan&) const = default;
};

struct FmeaDocument {
  std::string doc_id;
  std::string equipment_name;
  std::string short_description;
  EquipmentBoundary boundary;
  std::vector<FailureLocation> locations;
  std::vector<DegradationMechanism> mechanisms;
  std::vector<DegradationInfluence> influences;
  std::vector<PreventativeTask> tasks;
  std::vector<JobPlan> job_plans;
  Provenance provenance = Provenance::authored;

  bool operator==(const FmeaDocument&) const = default;
};

struct Violation {
  std::string code;
  std::string id;  // offending id or name; empty for document-level violations
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
};

/// Whole-document invariant check. Violation codes:
///   EMPTY_FIELD, INVALID_DOC_ID, UNTRIMMED_COMPONENT, DUPLICATE_COMPONENT,
///   DUPLICATE_ID, DANGLING_REF, INCONSISTENT_REF, EMPTY_TASK_REFS.
ValidationResult validate_document(const FmeaDocument& doc);

/// Item names of one step in document order. The boundary step projects the
/// component names; tasks project their descriptions.
std::vector<std::string> flatten_step_items(const FmeaDocument& doc, StepKind step);

Json to_json(const FmeaDocument& doc);
/// Strict ingest: unknown or mistyped fields throw Error INVALID_DOCUMENT.
FmeaDocument document_from_json(const Json& j);
Json violations_to_json(const std::vector<Violation>& violations);

}  // namespace fmea
