#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sp/grammar.hpp"
#include "sp/pattern.hpp"

namespace sp {

/// Search configuration shared by the matcher and the alignment builder.
struct SearchLimits {
  std::size_t maxFragments = 20;
  /// query length x target length at or below which matching is exact.
  std::size_t exactThreshold = 4096;
  std::size_t beamWidth = 10;
};

struct MatchPair {
  std::size_t query = 0;
  std::size_t target = 0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
  friend auto operator<=>(const MatchPair&, const MatchPair&) = default;
};

/// An order-preserving pairing of equal symbols.
struct MatchFragment {
  std::vector<MatchPair> pairs;
  /// Unmatched positions spanned inside the fragment, counted on both sides.
  std::size_t gapCount = 0;
  /// Sum of the matched symbols' costs in bits.
  double weight = 0.0;
};

/// Ranked by weight (desc), then fewer gaps, then lexicographically smallest
/// pair list. The top fragment is optimal when |query| x |target| <=
/// limits.exactThreshold.
std::vector<MatchFragment> findMatches(std::span<const Symbol> query, std::span<const Symbol> target,
                                       const Grammar& g, const SearchLimits& limits = {});

struct PatternHit {
  PatternId pattern = 0;
  MatchFragment fragment;
};

/// findMatches against every Old pattern of `g`, re-ranked globally.
std::vector<PatternHit> matchAllOld(std::span<const Symbol> query, const Grammar& g, const SearchLimits& limits = {});

// ---------------------------------------------------------------------------
// Generic chain search over interned sequences, shared with the builder.

/// Weight of pairing query[q] with target[t]; nullopt forbids the pair.
/// Only consulted when the two interned values are equal.
using PairWeight = std::function<std::optional<FixedBits>(std::size_t q, std::size_t t)>;

struct Chain {
  std::vector<MatchPair> pairs;
  FixedBits weight = 0;
  std::size_t gaps = 0;
};

/// Gap count of an ordered pair list.
std::size_t chainGaps(std::span<const MatchPair> pairs);

/// Best chain starting at each admissible pair, ranked by (weight desc, gaps
/// asc, pairs lexicographic) and truncated to `maxChains`. Exact dynamic
/// programming when query.size() * target.size() <= exactThreshold, seeded
/// hit-and-extend chaining otherwise.
std::vector<Chain> rankedChains(std::span<const std::uint32_t> query, std::span<const std::uint32_t> target,
                                const PairWeight& weight, std::size_t maxChains, std::size_t exactThreshold);

}  // namespace sp
