// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fmea/gateway.hpp"
#include "fmea/model.hpp"

namespace fmea {

struct FixtureSet {
  std::vector<FmeaDocument> documents;  // ascending doc_id
  LookupMap lookup;
};

/// Reads <dir>/corpus/*.json and <dir>/lookup.json. A file that does not
/// parse or validate throws INVALID_FIXTURE naming the file.
FixtureSet load_fixtures(const std::filesystem::path& dir);

/// Equipment family encoded in a fixture id: "centrifugal-pump-02" ->
/// "centrifugal-pump".
std::string fixture_family(const std::string& doc_id);

}  // namespace fmea
