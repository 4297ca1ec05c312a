// SPDX-License-Identifier: Apache-2.0
#include "fmea/grammar.hpp"

#include <unordered_map>

#include "fmea/text.hpp"

namespace fmea {

std::string_view list_header(StepKind step) {
  switch (step) {
    case StepKind::boundary: return "COMPONENTS";
    case StepKind::failure_locations: return "FAILURE LOCATIONS";
    case StepKind::mechanisms: return "MECHANISMS";
    case StepKind::influences: return "INFLUENCES";
    case StepKind::tasks: return "TASKS";
    case StepKind::job_plans: return "JOB PLANS";
  }
  return "";
}

std::string render_block(StepKind step, const std::optional<std::string>& description,
                         const std::vector<std::string>& items) {
  std::string out;
  if (step == StepKind::boundary) {
    out.append(kHeaderPrefix).append(kDescriptionHeader).append("\n");
    if (description && !description->empty()) out.append(*description).append("\n");
  }
  out.append(kHeaderPrefix).append(list_header(step)).append("\n");
  for (const auto& item : items) out.append("- ").append(item).append("\n");
  out.append(kHeaderPrefix).append(kEndHeader);
  return out;
}

std::string job_plan_line(const JobPlanLine& plan) {
  return trim(plan.name + " :: " + join(plan.tasks, "; ") + " :: " + plan.schedule);
}

std::optional<JobPlanLine> parse_job_plan_line(std::string_view line) {
  auto parts = split(line, "::");
  if (parts.size() < 2) return std::nullopt;
  JobPlanLine plan;
  plan.name = trim(parts[0]);
  for (const auto& t : split(parts[1], ";")) {
    auto task = trim(t);
    if (!task.empty()) plan.tasks.push_back(task);
  }
  if (parts.size() > 2) {
    std::vector<std::string> rest(parts.begin() + 2, parts.end());
    plan.schedule = trim(join(rest, "::"));
  }
  if (plan.name.empty() || plan.tasks.empty()) return std::nullopt;
  return plan;
}

std::vector<std::string> block_items(const FmeaDocument& doc, StepKind step) {
  if (step != StepKind::job_plans) return flatten_step_items(doc, step);
  std::unordered_map<std::string, std::string> task_text;
  for (const auto& t : doc.tasks) task_text[t.id] = t.description;
  std::vector<std::string> out;
  for (const auto& p : doc.job_plans) {
    JobPlanLine line{p.name, {}, p.schedule};
    for (const auto& ref : p.task_refs) {
      auto it = task_text.find(ref);
      line.tasks.push_back(it == task_text.end() ? ref : it->second);
    }
    out.push_back(job_plan_line(line));
  }
  return out;
}

}  // namespace fmea
