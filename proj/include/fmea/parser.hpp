// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmea/model.hpp"

namespace fmea {

struct ParseWarning {
  std::string code;  // DUPLICATE_DROPPED, EMPTY_ITEM, UNRECOGNIZED_LINE, UNEXPECTED_HEADER, MISSING_END
  size_t line_no = 0;

  bool operator==(const ParseWarning&) const = default;
};

struct ParsedFragment {
  StepKind step = StepKind::boundary;
  std::optional<std::string> description;
  std::vector<std::string> items;
  std::vector<ParseWarning> warnings;

  bool operator==(const ParsedFragment&) const = default;
  bool has_warning(std::string_view code) const;
};

enum class ParseError { none, no_recognized_block, wrong_block };

std::string_view parse_error_code(ParseError e);

struct ParseResult {
  std::optional<ParsedFragment> fragment;
  ParseError error = ParseError::none;
  std::string message;

  bool ok() const { return fragment.has_value(); }
};

/// Rule-based recognizer for the delimiter grammar. Total over arbitrary
/// bytes. Tolerates: text before the first step header and after "### END",
/// header case and surrounding whitespace, "* " bullets, blank lines.
/// Items are trimmed, empties dropped, and case-insensitive repeats dropped
/// keeping the first occurrence.
ParseResult parse(std::string_view text, StepKind step);

/// Canonical fragment JSON with fixed key order:
/// {"step":..,"description":..,"items":[..],"warnings":[{"code":..,"line_no":..}]}
std::string to_json_text(const ParsedFragment& fragment);
Json to_json(const ParsedFragment& fragment);
ParsedFragment fragment_from_json(const Json& j);

/// The fragment rendered back into its delimiter block.
std::string render_fragment(const ParsedFragment& fragment);

}  // namespace fmea
