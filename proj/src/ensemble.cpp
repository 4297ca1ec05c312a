// SPDX-License-Identifier: Apache-2.0
#include "fmea/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fmea/error.hpp"
#include "fmea/text.hpp"

namespace fmea {

double similarity(std::string_view a, std::string_view b) {
  if (trim(a).empty() || trim(b).empty()) throw Error("EMPTY_TEXT", "similarity of empty text");
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void validate(const EnsembleConfig& cfg) {
  if (cfg.variations.empty()) throw Error("INVALID_CONFIG", "ensemble needs at least one variation");
  if (!(cfg.vote_threshold > 0.0 && cfg.vote_threshold <= 1.0))
    throw Error("INVALID_CONFIG", "vote_threshold must be in (0, 1]");
  if (!(cfg.fuzzy_threshold >= 0.0 && cfg.fuzzy_threshold <= 1.0))
    throw Error("INVALID_CONFIG", "fuzzy_threshold must be in [0, 1]");
}

std::vector<std::vector<size_t>> shot_orderings(size_t n, size_t max_orders) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<size_t>> out;
  do {
    out.push_back(perm);
  } while (out.size() < max_orders && std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::vector<std::vector<GroupMember>> fuzzy_group(const std::vector<ParsedFragment>& fragments,
                                                  double fuzzy_threshold) {
  std::vector<std::vector<GroupMember>> groups;
  for (size_t v = 0; v < fragments.size(); ++v) {
    for (size_t i = 0; i < fragments[v].items.size(); ++i) {
      const auto& surface = fragments[v].items[i];
      std::vector<size_t> hits;
      for (size_t g = 0; g < groups.size(); ++g) {
        for (const auto& m : groups[g]) {
          if (similarity(surface, m.surface) >= fuzzy_threshold) {
            hits.push_back(g);
            break;
          }
        }
      }
      GroupMember member{v, i, surface};
      if (hits.empty()) {
        groups.push_back({std::move(member)});
        continue;
      }
      // Merge every hit group into the earliest one; hits are ascending so
      // erasing from the back keeps indices valid.
      auto& target = groups[hits.front()];
      for (size_t h = hits.size(); h-- > 1;) {
        target.insert(target.end(), groups[hits[h]].begin(), groups[hits[h]].end());
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(hits[h]));
      }
      target.push_back(std::move(member));
      std::sort(target.begin(), target.end(), [](const GroupMember& a, const GroupMember& b) {
        return std::tie(a.variation, a.item) < std::tie(b.variation, b.item);
      });
    }
  }
  return groups;
}

size_t vote_cutoff(double vote_threshold, size_t n_variations) {
  // The epsilon keeps exact products such as 0.1 * 30 from rounding up.
  auto cutoff = static_cast<size_t>(std::ceil(vote_threshold * static_cast<double>(n_variations) - 1e-9));
  return std::max<size_t>(cutoff, 1);
}

AggregateResult aggregate(const std::vector<ParsedFragment>& fragments, const EnsembleConfig& cfg) {
  validate(cfg);
  if (fragments.size() != cfg.variations.size())
    throw Error("SIZE_MISMATCH", std::to_string(fragments.size()) + " fragments for " +
                                     std::to_string(cfg.variations.size()) + " variations");
  if (fragments.empty()) throw Error("SIZE_MISMATCH", "no fragments to aggregate");
  const StepKind step = fragments.front().step;
  for (const auto& f : fragments)
    if (f.step != step) throw Error("STEP_MISMATCH", "fragments belong to different steps");

  struct Ranked {
    VotedItem item;
    GroupMember first;
  };
  std::vector<Ranked> kept;
  const size_t cutoff = vote_cutoff(cfg.vote_threshold, fragments.size());
  for (const auto& group : fuzzy_group(fragments, cfg.fuzzy_threshold)) {
    VotedItem voted;
    voted.canonical_name = group.front().surface;
    std::set<size_t> seen;
    for (const auto& m : group)
      if (seen.insert(m.variation).second) voted.supporters.emplace_back(m.variation, m.surface);
    voted.votes = voted.supporters.size();
    if (voted.votes >= cutoff) kept.push_back({std::move(voted), group.front()});
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Ranked& a, const Ranked& b) {
    if (a.item.votes != b.item.votes) return a.item.votes > b.item.votes;
    return std::tie(a.first.variation, a.first.item) < std::tie(b.first.variation, b.first.item);
  });

  AggregateResult result;
  result.fragment.step = step;
  for (const auto& f : fragments) {
    if (f.description) {
      result.fragment.description = f.description;
      break;
    }
  }
  for (auto& r : kept) {
    result.fragment.items.push_back(r.item.canonical_name);
    result.votes.push_back(std::move(r.item));
  }
  return result;
}

Json to_json(const AggregateResult& result) {
  Json j = to_json(result.fragment);
  j["votes"] = Json::array();
  for (const auto& v : result.votes) {
    Json supporters = Json::array();
    for (const auto& [variation, surface] : v.supporters) supporters.push_back({variation, surface});
    j["votes"].push_back({{"name", v.canonical_name}, {"votes", v.votes}, {"supporters", supporters}});
  }
  return j;
}

AggregateResult aggregate_from_json(const Json& j) {
  AggregateResult r;
  Json frag = j;
  frag.erase("votes");
  r.fragment = fragment_from_json(frag);
  for (const auto& v : j.at("votes")) {
    VotedItem item;
    item.canonical_name = v.at("name").get<std::string>();
    item.votes = v.at("votes").get<size_t>();
    for (const auto& s : v.at("supporters"))
      item.supporters.emplace_back(s.at(0).get<size_t>(), s.at(1).get<std::string>());
    r.votes.push_back(std::move(item));
  }
  return r;
}

}  // namespace fmea
