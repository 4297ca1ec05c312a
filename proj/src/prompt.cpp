// SPDX-License-Identifier: Apache-2.0
#include "fmea/prompt.hpp"

#include "fmea/error.hpp"
#include "fmea/grammar.hpp"
#include "fmea/text.hpp"

namespace fmea {

std::string_view mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::zero_shot: return "zero_shot";
    case PromptMode::random_shot: return "random_shot";
    case PromptMode::dfsp: return "dfsp";
  }
  return "zero_shot";
}

PromptMode parse_mode(std::string_view name) {
  if (name == "zero_shot" || name == "zero-shot") return PromptMode::zero_shot;
  if (name == "random_shot" || name == "random-shot") return PromptMode::random_shot;
  if (name == "dfsp") return PromptMode::dfsp;
  throw Error("INVALID_ARGUMENT", "unknown method '" + std::string(name) + "'");
}

std::string format_example(const FmeaDocument& doc, StepKind step) {
  if (step == StepKind::boundary) {
    if (trim(doc.boundary.description).empty())
      throw Error("MISSING_STEP_DATA", "document '" + doc.doc_id + "' has no boundary description");
    return render_block(step, doc.boundary.description, doc.boundary.components);
  }
  auto items = block_items(doc, step);
  if (items.empty())
    throw Error("MISSING_STEP_DATA",
                "document '" + doc.doc_id + "' has no " + std::string(step_name(step)) + " items");
  return render_block(step, std::nullopt, items);
}

std::string step_input(const FmeaDocument& doc, StepKind step) {
  auto prev = previous_step(step);
  if (!prev) return doc.short_description;
  return format_example(doc, *prev);
}

std::string retrieval_text(const FmeaDocument& doc, StepKind step) {
  auto prev = previous_step(step);
  if (!prev) return doc.short_description;
  auto upstream = join(block_items(doc, *prev), ", ");
  if (*prev == StepKind::boundary) return doc.boundary.description + "\n" + upstream;
  return upstream;
}

Shot make_shot(const FmeaDocument& doc, StepKind step) {
  return {doc.doc_id, step_input(doc, step), format_example(doc, step)};
}

std::string_view template_id(StepKind step) {
  switch (step) {
    case StepKind::boundary: return "boundary.v1";
    case StepKind::failure_locations: return "failure_locations.v1";
    case StepKind::mechanisms: return "mechanisms.v1";
    case StepKind::influences: return "influences.v1";
    case StepKind::tasks: return "tasks.v1";
    case StepKind::job_plans: return "job_plans.v1";
  }
  return "";
}

std::string_view instruction_header(StepKind step) {
  switch (step) {
    case StepKind::boundary:
      return "You are a reliability engineer. Given a short equipment description, produce its "
             "boundary: a functional description and main components. Use exactly the output "
             "format of the examples.";
    case StepKind::failure_locations:
      return "You are a reliability engineer. Given an equipment boundary, list the failure "
             "locations: points on the equipment where a failure might occur. Use exactly the "
             "output format of the examples.";
    case StepKind::mechanisms:
      return "You are a reliability engineer. Given the failure locations of a piece of "
             "equipment, list the degradation mechanisms that can lead to a failure. Use exactly "
             "the output format of the examples.";
    case StepKind::influences:
      return "You are a reliability engineer. Given the degradation mechanisms of a piece of "
             "equipment, list the degradation influences that cause them. Use exactly the output "
             "format of the examples.";
    case StepKind::tasks:
      return "You are a reliability engineer. Given the degradation influences of a piece of "
             "equipment, list preventative maintenance tasks. Use exactly the output format of "
             "the examples.";
    case StepKind::job_plans:
      return "You are a reliability engineer. Given preventative maintenance tasks, group them "
             "into job plans with a schedule. Use exactly the output format of the examples.";
  }
  return "";
}

std::string sanitize_prompt_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (c == '\n') {
      out.push_back(c);
    } else if (c == '\t') {
      out.push_back(' ');
    } else if (u >= 0x20 && u != 0x7f) {
      out.push_back(c);
    }
  }
  return out;
}

PromptSpec build_prompt(StepKind step, PromptMode mode, std::string query_input, std::vector<Shot> shots) {
  if (trim(query_input).empty()) throw Error("EMPTY_INPUT", "prompt input is empty");
  const bool count_ok = (mode == PromptMode::zero_shot && shots.empty()) ||
                        (mode == PromptMode::random_shot && shots.size() == 1) ||
                        (mode == PromptMode::dfsp && !shots.empty());
  if (!count_ok)
    throw Error("SHOT_COUNT_MISMATCH", std::string(mode_name(mode)) + " prompt cannot take " +
                                           std::to_string(shots.size()) + " shot(s)");

  std::string rendered(instruction_header(step));
  rendered += "\n\n";
  for (const auto& shot : shots) {
    rendered += "INPUT: " + shot.input + "\nOUTPUT:\n" + shot.output + "\n\n";
  }
  rendered += "INPUT: " + query_input + "\nOUTPUT:\n";

  PromptSpec spec;
  spec.step = step;
  spec.mode = mode;
  spec.shots = std::move(shots);
  spec.query_input = std::move(query_input);
  spec.template_id = std::string(template_id(step));
  spec.rendered = sanitize_prompt_text(rendered);
  return spec;
}

}  // namespace fmea
