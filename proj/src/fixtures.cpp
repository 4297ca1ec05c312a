// SPDX-License-Identifier: Apache-2.0
#include "fmea/fixtures.hpp"

#include <algorithm>

#include "fmea/corpus.hpp"
#include "fmea/error.hpp"

namespace fmea {

namespace fs = std::filesystem;

FixtureSet load_fixtures(const fs::path& dir) {
  FixtureSet set;
  std::vector<fs::path> files;
  if (!fs::is_directory(dir / "corpus")) throw Error("INVALID_FIXTURE", "missing " + (dir / "corpus").string());
  for (const auto& entry : fs::directory_iterator(dir / "corpus"))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    FmeaDocument doc;
    try {
      doc = document_from_json(Json::parse(read_file(file)));
    } catch (const std::exception& e) {
      throw Error("INVALID_FIXTURE", file.string() + ": " + e.what());
    }
    auto check = validate_document(doc);
    if (!check.ok())
      throw Error("INVALID_FIXTURE", file.string() + ": " + check.violations.front().message,
                  violations_to_json(check.violations));
    set.documents.push_back(std::move(doc));
  }
  std::sort(set.documents.begin(), set.documents.end(),
            [](const FmeaDocument& a, const FmeaDocument& b) { return a.doc_id < b.doc_id; });
  try {
    set.lookup = load_lookup_map(dir / "lookup.json");
  } catch (const std::exception& e) {
    throw Error("INVALID_FIXTURE", (dir / "lookup.json").string() + ": " + e.what());
  }
  return set;
}

std::string fixture_family(const std::string& doc_id) {
  auto dash = doc_id.rfind('-');
  return dash == std::string::npos ? doc_id : doc_id.substr(0, dash);
}

}  // namespace fmea
