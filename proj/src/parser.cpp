// SPDX-License-Identifier: Apache-2.0
#include "fmea/parser.hpp"

#include <algorithm>
#include <unordered_set>

#include "fmea/error.hpp"
#include "fmea/grammar.hpp"
#include "fmea/text.hpp"

namespace fmea {

bool ParsedFragment::has_warning(std::string_view code) const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [&](const ParseWarning& w) { return w.code == code; });
}

std::string_view parse_error_code(ParseError e) {
  switch (e) {
    case ParseError::none: return "";
    case ParseError::no_recognized_block: return "NO_RECOGNIZED_BLOCK";
    case ParseError::wrong_block: return "WRONG_BLOCK";
  }
  return "";
}

namespace {

enum class Header { none, unknown, description, end, list };

struct Line {
  Header kind = Header::none;
  std::optional<StepKind> list_step;  // for Header::list
  std::string text;                   // trimmed line
};

Line classify(const std::string& raw) {
  Line line;
  line.text = trim(raw);
  if (line.text.rfind("###", 0) != 0) return line;
  std::string name = to_upper(normalize_name(line.text.substr(3)));
  if (name == kDescriptionHeader) {
    line.kind = Header::description;
  } else if (name == kEndHeader) {
    line.kind = Header::end;
  } else {
    line.kind = Header::unknown;
    for (StepKind s : kAllSteps) {
      if (name == list_header(s)) {
        line.kind = Header::list;
        line.list_step = s;
      }
    }
  }
  return line;
}

// The step a recognized header belongs to, if any.
std::optional<StepKind> header_step(const Line& line) {
  if (line.kind == Header::description) return StepKind::boundary;
  if (line.kind == Header::list) return line.list_step;
  return std::nullopt;
}

std::optional<std::string> bullet_item(const std::string& trimmed) {
  if (trimmed.size() >= 2 && (trimmed[0] == '-' || trimmed[0] == '*') &&
      (trimmed[1] == ' ' || trimmed[1] == '\t'))
    return trim(std::string_view(trimmed).substr(2));
  if (trimmed == "-" || trimmed == "*") return std::string();
  return std::nullopt;
}

}  // namespace

ParseResult parse(std::string_view text, StepKind step) {
  auto raw_lines = split_lines(text);
  std::vector<Line> lines;
  lines.reserve(raw_lines.size());
  for (const auto& r : raw_lines) lines.push_back(classify(r));

  size_t start = lines.size();
  bool saw_other_step = false;
  for (size_t i = 0; i < lines.size(); ++i) {
    auto s = header_step(lines[i]);
    if (!s) continue;
    if (*s == step) {
      start = i;
      break;
    }
    saw_other_step = true;
  }
  if (start == lines.size()) {
    ParseResult r;
    r.error = saw_other_step ? ParseError::wrong_block : ParseError::no_recognized_block;
    r.message = saw_other_step ? "only blocks for other steps were found"
                               : "no '### " + std::string(list_header(step)) + "' block found";
    return r;
  }

  ParsedFragment frag;
  frag.step = step;
  std::vector<std::string> description_lines;
  std::unordered_set<std::string> seen;
  enum class Section { description, items } section =
      lines[start].kind == Header::description ? Section::description : Section::items;
  bool saw_list_header = section == Section::items;
  bool terminated = false;

  for (size_t i = start + 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const size_t line_no = i + 1;
    if (line.kind == Header::end) {
      terminated = true;
      break;
    }
    if (line.kind == Header::list && line.list_step == step && step == StepKind::boundary &&
        section == Section::description) {
      section = Section::items;
      saw_list_header = true;
      continue;
    }
    if (line.kind != Header::none) {
      // A header that does not continue this block closes it.
      frag.warnings.push_back({"UNEXPECTED_HEADER", line_no});
      terminated = true;
      break;
    }
    if (line.text.empty()) continue;
    if (section == Section::description) {
      description_lines.push_back(line.text);
      continue;
    }
    auto item = bullet_item(line.text);
    if (!item) {
      frag.warnings.push_back({"UNRECOGNIZED_LINE", line_no});
      continue;
    }
    if (item->empty()) {
      frag.warnings.push_back({"EMPTY_ITEM", line_no});
      continue;
    }
    if (!seen.insert(to_lower(*item)).second) {
      frag.warnings.push_back({"DUPLICATE_DROPPED", line_no});
      continue;
    }
    frag.items.push_back(std::move(*item));
  }
  if (!terminated) frag.warnings.push_back({"MISSING_END", lines.size()});
  if (step == StepKind::boundary) {
    if (!description_lines.empty()) frag.description = join(description_lines, "\n");
    if (!saw_list_header) frag.warnings.push_back({"MISSING_COMPONENTS", lines.size()});
  }
  return ParseResult{std::move(frag), ParseError::none, ""};
}

Json to_json(const ParsedFragment& fragment) {
  Json j;
  j["step"] = std::string(step_name(fragment.step));
  j["description"] = fragment.description ? Json(*fragment.description) : Json(nullptr);
  j["items"] = fragment.items;
  j["warnings"] = Json::array();
  for (const auto& w : fragment.warnings) j["warnings"].push_back({{"code", w.code}, {"line_no", w.line_no}});
  return j;
}

std::string to_json_text(const ParsedFragment& fragment) { return to_json(fragment).dump(); }

ParsedFragment fragment_from_json(const Json& j) {
  ParsedFragment f;
  f.step = parse_step(j.at("step").get<std::string>());
  if (!j.at("description").is_null()) f.description = j.at("description").get<std::string>();
  f.items = j.at("items").get<std::vector<std::string>>();
  for (const auto& w : j.at("warnings"))
    f.warnings.push_back({w.at("code").get<std::string>(), w.at("line_no").get<size_t>()});
  return f;
}

std::string render_fragment(const ParsedFragment& fragment) {
  return render_block(fragment.step, fragment.description, fragment.items);
}

}  // namespace fmea
