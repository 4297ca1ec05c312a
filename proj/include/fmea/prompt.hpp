// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fmea/model.hpp"

namespace fmea {

enum class PromptMode { zero_shot, random_shot, dfsp };

std::string_view mode_name(PromptMode mode);
PromptMode parse_mode(std::string_view name);

/// One worked example: the input the example document would have been given
/// for this step and its formatted answer.
struct Shot {
  std::string doc_id;
  std::string input;
  std::string output;

  bool operator==(const Shot&) const = default;
};

struct PromptSpec {
  StepKind step = StepKind::boundary;
  PromptMode mode = PromptMode::zero_shot;
  std::vector<Shot> shots;
  std::string query_input;
  std::string template_id;
  std::string rendered;
};

/// The document's answer for a step in delimiter grammar. Throws
/// MISSING_STEP_DATA when the document has nothing for that step.
std::string format_example(const FmeaDocument& doc, StepKind step);

/// The input a step consumes: the short description for the boundary step,
/// otherwise the formatted block of the preceding step.
std::string step_input(const FmeaDocument& doc, StepKind step);

/// Text embedded for retrieval: the short description for the boundary
/// step; for later steps the upstream content, e.g. boundary description
/// followed by the components joined with ", ".
std::string retrieval_text(const FmeaDocument& doc, StepKind step);

Shot make_shot(const FmeaDocument& doc, StepKind step);

std::string_view template_id(StepKind step);
std::string_view instruction_header(StepKind step);

/// header + "\n\n" + per shot "INPUT: <in>\nOUTPUT:\n<out>\n\n" +
/// "INPUT: <query>\nOUTPUT:\n", with control characters other than LF
/// removed (tabs become spaces). Shot order is kept as given. Throws
/// SHOT_COUNT_MISMATCH or EMPTY_INPUT.
PromptSpec build_prompt(StepKind step, PromptMode mode, std::string query_input, std::vector<Shot> shots);

std::string sanitize_prompt_text(std::string_view text);

}  // namespace fmea
