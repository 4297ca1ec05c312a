// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <set>

#include "fmea/random.hpp"
#include "fmea/text.hpp"

using namespace fmea;

TEST_CASE("trim and normalize_name") {
  CHECK(trim("  a b \t\n") == "a b");
  CHECK(trim("") == "");
  CHECK(normalize_name("  Bearing   HOUSING\t") == "bearing housing");
  CHECK(iequals("Casing", "cASING"));
  CHECK_FALSE(iequals("Casing", "Casings"));
}

TEST_CASE("tokenize splits on punctuation and keeps utf-8") {
  CHECK(tokenize("Pump-casing, impeller!") == std::vector<std::string>{"pump", "casing", "impeller"});
  CHECK(tokenize("  ") .empty());
  CHECK(tokenize("Kühler 2") == std::vector<std::string>{"kühler", "2"});
}

TEST_CASE("split_lines drops carriage returns") {
  CHECK(split_lines("a\r\nb\n\nc") == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("split and join are inverse for non-empty separators") {
  auto parts = split("a::b::::c", "::");
  CHECK(parts == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(join(parts, "::") == "a::b::::c");
}

TEST_CASE("fnv1a64 reference values") {
  // Published FNV-1a 64 test vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("uniform_below stays in range and covers it") {
  std::mt19937_64 rng(3);
  std::map<std::uint64_t, int> seen;
  for (int i = 0; i < 6000; ++i) ++seen[uniform_below(rng, 6)];
  CHECK(seen.size() == 6);
  for (const auto& [v, n] : seen) {
    CHECK(v < 6);
    CHECK(n > 800);
    CHECK(n < 1200);
  }
  CHECK(uniform_below(rng, 1) == 0);
}

TEST_CASE("seeded_shuffle is a deterministic permutation") {
  std::vector<int> a(50), b;
  for (int i = 0; i < 50; ++i) a[i] = i;
  b = a;
  seeded_shuffle(a, 11);
  seeded_shuffle(b, 11);
  CHECK(a == b);
  CHECK(std::set<int>(a.begin(), a.end()).size() == 50);
  auto c = b;
  seeded_shuffle(c, 12);
  CHECK(c != b);
}
