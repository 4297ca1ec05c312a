// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fmea/fixtures.hpp"

#include <fstream>
#include <map>

#include "fmea/corpus.hpp"
#include "fmea/embedding.hpp"
#include "fmea/error.hpp"
#include "fmea/parser.hpp"
#include "fmea/prompt.hpp"
#include "helpers.hpp"

using namespace fmea;
using fmea::testing::TempDir;
namespace fs = std::filesystem;

TEST_CASE("fixtures load deterministically and validate") {
  auto a = load_fixtures(fmea::testing::fixture_dir());
  auto b = load_fixtures(fmea::testing::fixture_dir());
  REQUIRE(a.documents.size() == 20);
  CHECK(a.documents == b.documents);
  CHECK(a.lookup == b.lookup);
  CHECK(std::is_sorted(a.documents.begin(), a.documents.end(),
                       [](const auto& x, const auto& y) { return x.doc_id < y.doc_id; }));
  std::map<std::string, int> families;
  for (const auto& d : a.documents) {
    INFO(d.doc_id);
    CHECK(validate_document(d).ok());
    CHECK(d.provenance == Provenance::fixture);
    for (auto step : kAllSteps) CHECK_FALSE(flatten_step_items(d, step).empty());
    ++families[fixture_family(d.doc_id)];
  }
  CHECK(families.size() == 5);
  for (const auto& [family, n] : families) CHECK(n >= 2);
  CHECK(fixture_family("centrifugal-pump-02") == "centrifugal-pump");
}

TEST_CASE("lookup values parse cleanly for their step") {
  auto set = load_fixtures(fmea::testing::fixture_dir());
  size_t boundary = 0, locations = 0;
  for (const auto& d : set.documents) {
    auto hit = set.lookup.find(d.short_description);
    REQUIRE(hit != set.lookup.end());
    auto r = parse(hit->second, StepKind::boundary);
    REQUIRE(r.ok());
    CHECK(r.fragment->warnings.empty());
    ++boundary;
    auto loc = set.lookup.find(format_example(d, StepKind::boundary));
    REQUIRE(loc != set.lookup.end());
    auto l = parse(loc->second, StepKind::failure_locations);
    REQUIRE(l.ok());
    CHECK(l.fragment->warnings.empty());
    ++locations;
  }
  CHECK(set.lookup.size() == boundary + locations);
}

TEST_CASE("leave-one-out nearest neighbour stays in the family") {
  auto set = load_fixtures(fmea::testing::fixture_dir());
  HashEmbedder embedder;
  for (auto step : {StepKind::boundary, StepKind::failure_locations}) {
    for (const auto& query : set.documents) {
      std::vector<PoolEntry> pool;
      for (const auto& d : set.documents)
        if (d.doc_id != query.doc_id) pool.push_back({d.doc_id, retrieval_text(d, step), ""});
      auto top = rank_candidates(retrieval_text(query, step), pool, 1, embedder);
      INFO(query.doc_id << " -> " << top[0].doc_id);
      CHECK(fixture_family(top[0].doc_id) == fixture_family(query.doc_id));
    }
  }
}

TEST_CASE("a corrupted fixture file is named in the error") {
  TempDir dir("fixtures");
  fs::copy(fmea::testing::fixture_dir(), dir.path(), fs::copy_options::recursive);
  const auto victim = dir.path() / "corpus" / "control-valve-02.json";
  auto j = Json::parse(read_file(victim));
  j["mechanisms"][0]["location_ref"] = "loc-404";
  std::ofstream(victim) << j.dump(2);
  try {
    load_fixtures(dir.path());
    FAIL("expected INVALID_FIXTURE");
  } catch (const Error& e) {
    CHECK(e.code() == "INVALID_FIXTURE");
    CHECK(std::string(e.what()).find("control-valve-02.json") != std::string::npos);
  }
  std::ofstream(victim) << "{ not json";
  try {
    load_fixtures(dir.path());
    FAIL("expected INVALID_FIXTURE");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("control-valve-02.json") != std::string::npos);
  }
  fs::remove_all(dir.path() / "corpus");
  CHECK_THROWS_AS(load_fixtures(dir.path()), Error);
}
