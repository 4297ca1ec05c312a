// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented delimiter grammar shared by the prompt builder (emission)
// and the response parser (recognition). LF newlines, one item per line:
//
//   ### DESCRIPTION            boundary only
//   <free text lines>
//   ### COMPONENTS
//   - <item>
//   ### END
//
//   ### FAILURE LOCATIONS      (likewise MECHANISMS, INFLUENCES, TASKS, JOB PLANS)
//   - <item>
//   ### END
//
// Job plan items read "<name> :: <task>; <task> :: <schedule>".
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmea/model.hpp"

namespace fmea {

inline constexpr std::string_view kHeaderPrefix = "### ";
inline constexpr std::string_view kDescriptionHeader = "DESCRIPTION";
inline constexpr std::string_view kEndHeader = "END";

/// Item-list header of a step ("COMPONENTS" for the boundary step).
std::string_view list_header(StepKind step);

std::string render_block(StepKind step, const std::optional<std::string>& description,
                         const std::vector<std::string>& items);

/// Items exactly as a block for this step would list them: component,
/// location, mechanism and influence names, task descriptions, and full job
/// plan lines.
std::vector<std::string> block_items(const FmeaDocument& doc, StepKind step);

struct JobPlanLine {
  std::string name;
  std::vector<std::string> tasks;
  std::string schedule;
};

std::string job_plan_line(const JobPlanLine& plan);
/// Splits "<name> :: <t1>; <t2> :: <schedule>". The schedule part may be
/// missing; nullopt when the name or task list is empty.
std::optional<JobPlanLine> parse_job_plan_line(std::string_view line);

}  // namespace fmea
