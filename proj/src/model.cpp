// SPDX-License-Identifier: Apache-2.0
#include "fmea/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "fmea/error.hpp"
#include "fmea/text.hpp"

namespace fmea {

std::string_view step_name(StepKind step) {
  switch (step) {
    case StepKind::boundary: return "boundary";
    case StepKind::failure_locations: return "failure_locations";
    case StepKind::mechanisms: return "mechanisms";
    case StepKind::influences: return "influences";
    case StepKind::tasks: return "tasks";
    case StepKind::job_plans: return "job_plans";
  }
  return "unknown";
}

StepKind parse_step(std::string_view name) {
  if (name == "boundary_components") return StepKind::boundary;
  for (StepKind s : kAllSteps)
    if (step_name(s) == name) return s;
  throw Error("UNKNOWN_STEP", "unknown step '" + std::string(name) + "'");
}

size_t step_index(StepKind step) { return static_cast<size_t>(step); }

std::optional<StepKind> previous_step(StepKind step) {
  size_t i = step_index(step);
  if (i == 0) return std::nullopt;
  return kAllSteps[i - 1];
}

std::optional<StepKind> next_step(StepKind step) {
  size_t i = step_index(step);
  if (i + 1 >= kAllSteps.size()) return std::nullopt;
  return kAllSteps[i + 1];
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::authored: return "authored";
    case Provenance::generated: return "generated";
    case Provenance::fixture: return "fixture";
  }
  return "authored";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "authored") return Provenance::authored;
  if (name == "generated") return Provenance::generated;
  if (name == "fixture") return Provenance::fixture;
  throw Error("INVALID_DOCUMENT", "unknown provenance '" + std::string(name) + "'");
}

bool ValidationResult::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

namespace {

bool valid_doc_id(const std::string& id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

class Checker {
 public:
  void add(std::string code, std::string id, std::string message) {
    result_.violations.push_back({std::move(code), std::move(id), std::move(message)});
  }

  void non_empty(const std::string& value, const std::string& where) {
    if (trim(value).empty()) add("EMPTY_FIELD", where, where + " is empty");
  }

  // Entity ids share one namespace per document.
  void claim_id(const std::string& id, const std::string& kind) {
    if (id.empty()) {
      add("EMPTY_FIELD", kind + ".id", kind + " has an empty id");
      return;
    }
    if (!ids_.insert(id).second) add("DUPLICATE_ID", id, "id '" + id + "' used more than once");
  }

  ValidationResult take() { return std::move(result_); }

 private:
  ValidationResult result_;
  std::unordered_set<std::string> ids_;
};

}  // namespace

ValidationResult validate_document(const FmeaDocument& doc) {
  Checker check;

  if (doc.doc_id.empty())
    check.add("EMPTY_FIELD", "doc_id", "doc_id is empty");
  else if (!valid_doc_id(doc.doc_id))
    check.add("INVALID_DOC_ID", doc.doc_id, "doc_id must match [A-Za-z0-9._-]+ and not start with '.'");
  check.non_empty(doc.equipment_name, "equipment_name");
  check.non_empty(doc.short_description, "short_description");
  check.non_empty(doc.boundary.description, "boundary.description");

  std::set<std::string> component_keys;
  for (const auto& c : doc.boundary.components) {
    std::string t = trim(c);
    if (t.empty()) {
      check.add("EMPTY_FIELD", "boundary.components", "component name is empty");
      continue;
    }
    if (t != c) check.add("UNTRIMMED_COMPONENT", c, "component name has surrounding whitespace");
    if (!component_keys.insert(to_lower(t)).second)
      check.add("DUPLICATE_COMPONENT", c, "component '" + c + "' duplicates another (case-insensitive)");
  }

  std::unordered_map<std::string, const FailureLocation*> locations;
  std::unordered_map<std::string, const DegradationMechanism*> mechanisms;
  std::unordered_map<std::string, const DegradationInfluence*> influences;
  std::unordered_set<std::string> tasks;

  for (const auto& l : doc.locations) {
    check.claim_id(l.id, "location");
    check.non_empty(l.name, l.id.empty() ? "location.name" : l.id);
    if (l.component_ref && !component_keys.count(to_lower(trim(*l.component_ref))))
      check.add("DANGLING_REF", *l.component_ref,
                "location " + l.id + " references unknown component '" + *l.component_ref + "'");
    locations.emplace(l.id, &l);
  }
  for (const auto& m : doc.mechanisms) {
    check.claim_id(m.id, "mechanism");
    check.non_empty(m.name, m.id.empty() ? "mechanism.name" : m.id);
    if (!locations.count(m.location_ref))
      check.add("DANGLING_REF", m.location_ref,
                "mechanism " + m.id + " references unknown location '" + m.location_ref + "'");
    mechanisms.emplace(m.id, &m);
  }
  for (const auto& i : doc.influences) {
    check.claim_id(i.id, "influence");
    check.non_empty(i.name, i.id.empty() ? "influence.name" : i.id);
    if (!mechanisms.count(i.mechanism_ref))
      check.add("DANGLING_REF", i.mechanism_ref,
                "influence " + i.id + " references unknown mechanism '" + i.mechanism_ref + "'");
    influences.emplace(i.id, &i);
  }
  for (const auto& t : doc.tasks) {
    check.claim_id(t.id, "task");
    check.non_empty(t.description, t.id.empty() ? "task.description" : t.id);
    if (!locations.count(t.location_ref)) {
      check.add("DANGLING_REF", t.location_ref,
                "task " + t.id + " references unknown location '" + t.location_ref + "'");
    }
    const DegradationMechanism* mech = nullptr;
    if (t.mechanism_ref) {
      auto it = mechanisms.find(*t.mechanism_ref);
      if (it == mechanisms.end()) {
        check.add("DANGLING_REF", *t.mechanism_ref,
                  "task " + t.id + " references unknown mechanism '" + *t.mechanism_ref + "'");
      } else {
        mech = it->second;
        if (mech->location_ref != t.location_ref)
          check.add("INCONSISTENT_REF", t.id, "task mechanism belongs to a different location");
      }
    }
    if (t.influence_ref) {
      auto it = influences.find(*t.influence_ref);
      if (it == influences.end()) {
        check.add("DANGLING_REF", *t.influence_ref,
                  "task " + t.id + " references unknown influence '" + *t.influence_ref + "'");
      } else if (!mechanisms.count(it->second->mechanism_ref)) {
        // The influence's own dangling parent is already reported.
      } else if (t.mechanism_ref) {
        if (it->second->mechanism_ref != *t.mechanism_ref)
          check.add("INCONSISTENT_REF", t.id, "task influence belongs to a different mechanism");
      } else {
        auto parent = mechanisms.find(it->second->mechanism_ref);
        if (parent != mechanisms.end() && parent->second->location_ref != t.location_ref)
          check.add("INCONSISTENT_REF", t.id, "task influence belongs to a different location");
      }
    }
    tasks.insert(t.id);
  }
  for (const auto& p : doc.job_plans) {
    check.claim_id(p.id, "job_plan");
    check.non_empty(p.name, p.id.empty() ? "job_plan.name" : p.id);
    if (p.task_refs.empty()) check.add("EMPTY_TASK_REFS", p.id, "job plan " + p.id + " has no tasks");
    for (const auto& ref : p.task_refs)
      if (!tasks.count(ref))
        check.add("DANGLING_REF", ref, "job plan " + p.id + " references unknown task '" + ref + "'");
  }
  return check.take();
}

std::vector<std::string> flatten_step_items(const FmeaDocument& doc, StepKind step) {
  std::vector<std::string> out;
  switch (step) {
    case StepKind::boundary:
      return doc.boundary.components;
    case StepKind::failure_locations:
      for (const auto& l : doc.locations) out.push_back(l.name);
      break;
    case StepKind::mechanisms:
      for (const auto& m : doc.mechanisms) out.push_back(m.name);
      break;
    case StepKind::influences:
      for (const auto& i : doc.influences) out.push_back(i.name);
      break;
    case StepKind::tasks:
      for (const auto& t : doc.tasks) out.push_back(t.description);
      break;
    case StepKind::job_plans:
      for (const auto& p : doc.job_plans) out.push_back(p.name);
      break;
  }
  return out;
}

// ---------------------------------------------------------------- JSON

namespace {

Json opt(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

[[noreturn]] void reject(const std::string& message) {
  throw Error("INVALID_DOCUMENT", message);
}

void only_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
  if (!obj.is_object()) reject(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      reject("unknown field '" + key + "' in " + where);
  }
}

std::string req_string(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) reject("missing field '" + std::string(key) + "' in " + where);
  if (!it->is_string()) reject("field '" + std::string(key) + "' in " + where + " must be a string");
  return it->get<std::string>();
}

std::optional<std::string> opt_string(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) reject("field '" + std::string(key) + "' in " + where + " must be a string or null");
  return it->get<std::string>();
}

const Json& list_field(const Json& obj, const char* key, const std::string& where) {
  static const Json empty = Json::array();
  auto it = obj.find(key);
  if (it == obj.end()) return empty;
  if (!it->is_array()) reject("field '" + std::string(key) + "' in " + where + " must be an array");
  return *it;
}

std::vector<std::string> string_list(const Json& arr, const std::string& where) {
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) reject(where + " must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Json to_json(const FmeaDocument& doc) {
  Json j;
  j["doc_id"] = doc.doc_id;
  j["equipment_name"] = doc.equipment_name;
  j["short_description"] = doc.short_description;
  j["boundary"] = {{"description", doc.boundary.description},
                   {"components", doc.boundary.components}};
  j["locations"] = Json::array();
  for (const auto& l : doc.locations)
    j["locations"].push_back({{"id", l.id}, {"name", l.name}, {"component_ref", opt(l.component_ref)}});
  j["mechanisms"] = Json::array();
  for (const auto& m : doc.mechanisms)
    j["mechanisms"].push_back({{"id", m.id}, {"name", m.name}, {"location_ref", m.location_ref}});
  j["influences"] = Json::array();
  for (const auto& i : doc.influences)
    j["influences"].push_back({{"id", i.id}, {"name", i.name}, {"mechanism_ref", i.mechanism_ref}});
  j["tasks"] = Json::array();
  for (const auto& t : doc.tasks)
    j["tasks"].push_back({{"id", t.id},
                          {"description", t.description},
                          {"location_ref", t.location_ref},
                          {"mechanism_ref", opt(t.mechanism_ref)},
                          {"influence_ref", opt(t.influence_ref)}});
  j["job_plans"] = Json::array();
  for (const auto& p : doc.job_plans)
    j["job_plans"].push_back(
        {{"id", p.id}, {"name", p.name}, {"task_refs", p.task_refs}, {"schedule", p.schedule}});
  j["provenance"] = std::string(provenance_name(doc.provenance));
  return j;
}

FmeaDocument document_from_json(const Json& j) {
  only_keys(j,
            {"doc_id", "equipment_name", "short_description", "boundary", "locations", "mechanisms",
             "influences", "tasks", "job_plans", "provenance"},
            "document");
  FmeaDocument doc;
  doc.doc_id = req_string(j, "doc_id", "document");
  doc.equipment_name = req_string(j, "equipment_name", "document");
  doc.short_description = req_string(j, "short_description", "document");

  auto b = j.find("boundary");
  if (b == j.end()) reject("missing field 'boundary' in document");
  only_keys(*b, {"description", "components"}, "boundary");
  doc.boundary.description = req_string(*b, "description", "boundary");
  doc.boundary.components = string_list(list_field(*b, "components", "boundary"), "boundary.components");

  for (const auto& l : list_field(j, "locations", "document")) {
    only_keys(l, {"id", "name", "component_ref"}, "location");
    doc.locations.push_back({req_string(l, "id", "location"), req_string(l, "name", "location"),
                             opt_string(l, "component_ref", "location")});
  }
  for (const auto& m : list_field(j, "mechanisms", "document")) {
    only_keys(m, {"id", "name", "location_ref"}, "mechanism");
    doc.mechanisms.push_back({req_string(m, "id", "mechanism"), req_string(m, "name", "mechanism"),
                              req_string(m, "location_ref", "mechanism")});
  }
  for (const auto& i : list_field(j, "influences", "document")) {
    only_keys(i, {"id", "name", "mechanism_ref"}, "influence");
    doc.influences.push_back({req_string(i, "id", "influence"), req_string(i, "name", "influence"),
                              req_string(i, "mechanism_ref", "influence")});
  }
  for (const auto& t : list_field(j, "tasks", "document")) {
    only_keys(t, {"id", "description", "location_ref", "mechanism_ref", "influence_ref"}, "task");
    doc.tasks.push_back({req_string(t, "id", "task"), req_string(t, "description", "task"),
                         req_string(t, "location_ref", "task"), opt_string(t, "mechanism_ref", "task"),
                         opt_string(t, "influence_ref", "task")});
  }
  for (const auto& p : list_field(j, "job_plans", "document")) {
    only_keys(p, {"id", "name", "task_refs", "schedule"}, "job_plan");
    JobPlan plan;
    plan.id = req_string(p, "id", "job_plan");
    plan.name = req_string(p, "name", "job_plan");
    plan.task_refs = string_list(list_field(p, "task_refs", "job_plan"), "job_plan.task_refs");
    plan.schedule = opt_string(p, "schedule", "job_plan").value_or("");
    doc.job_plans.push_back(std::move(plan));
  }
  if (auto p = opt_string(j, "provenance", "document")) doc.provenance = parse_provenance(*p);
  return doc;
}

Json violations_to_json(const std::vector<Violation>& violations) {
  Json arr = Json::array();
  for (const auto& v : violations)
    arr.push_back({{"code", v.code}, {"id", v.id}, {"message", v.message}});
  return arr;
}

}  // namespace fmea
