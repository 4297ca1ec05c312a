// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fmea {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

/// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string normalize_name(std::string_view s);

/// Lowercased alphanumeric runs. Anything else (whitespace, punctuation,
/// control bytes) separates tokens. Bytes >= 0x80 are kept inside tokens so
/// UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view s, std::string_view sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool iequals(std::string_view a, std::string_view b);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace fmea
