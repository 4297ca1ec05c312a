// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fmea/parser.hpp"

namespace fmea {

/// Token-set Jaccard after lowercasing and whitespace/punctuation
/// tokenization. Symmetric, 1.0 iff the token sets are equal. Throws
/// EMPTY_TEXT when either input is blank.
double similarity(std::string_view a, std::string_view b);

struct Variation {
  std::string provider_id;
  size_t shot_order = 0;  // index into shot_orderings()

  bool operator==(const Variation&) const = default;
};

struct EnsembleConfig {
  std::vector<Variation> variations;
  double vote_threshold = 0.5;   // (0, 1]
  double fuzzy_threshold = 0.85;  // [0, 1]
};

/// Throws INVALID_CONFIG when a threshold is out of range or there are no
/// variations.
void validate(const EnsembleConfig& cfg);

/// Permutations of [0, n) in lexicographic order, capped at max_orders.
std::vector<std::vector<size_t>> shot_orderings(size_t n, size_t max_orders = 6);

struct GroupMember {
  size_t variation = 0;
  size_t item = 0;
  std::string surface;

  bool operator==(const GroupMember&) const = default;
};

/// Single-link grouping: an item joins every existing group holding a member
/// with similarity >= threshold, merging those groups. Items are visited in
/// (variation, item) order; groups are returned ordered by their earliest
/// member and members in visit order. The result equals the transitive
/// closure of the pairwise "similar" relation.
std::vector<std::vector<GroupMember>> fuzzy_group(const std::vector<ParsedFragment>& fragments,
                                                  double fuzzy_threshold);

struct VotedItem {
  std::string canonical_name;
  size_t votes = 0;
  /// One entry per supporting variation (its first surface form in the group).
  std::vector<std::pair<size_t, std::string>> supporters;

  bool operator==(const VotedItem&) const = default;
};

struct AggregateResult {
  ParsedFragment fragment;
  std::vector<VotedItem> votes;  // kept groups, in output order
};

/// Minimum votes a group needs: ceil(vote_threshold * n), at least 1.
size_t vote_cutoff(double vote_threshold, size_t n_variations);

/// Fuzzy vote over one fragment per variation. Groups with at least
/// vote_cutoff() distinct supporting variations survive, ordered by votes
/// descending then first appearance. The boundary description comes from the
/// first variation that produced one. Throws STEP_MISMATCH / SIZE_MISMATCH.
AggregateResult aggregate(const std::vector<ParsedFragment>& fragments, const EnsembleConfig& cfg);

Json to_json(const AggregateResult& result);
AggregateResult aggregate_from_json(const Json& j);

}  // namespace fmea
