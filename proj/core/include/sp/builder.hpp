#pragma once

#include <cstddef>
#include <vector>

#include "sp/alignment.hpp"
#include "sp/grammar.hpp"
#include "sp/match.hpp"

namespace sp {

struct SearchParams {
  std::size_t beamWidth = 10;
  std::size_t maxIterations = 8;
  /// Keep only alignments in which every New symbol is matched.
  bool allOrNothing = false;
  SearchLimits limits;
};

/// Compression difference in bits: the cost of the New symbols that sit in
/// a column, minus the cost of the identifier symbols of each Old row that no
/// column supplies. A row whose head symbol shares a column with a New
/// symbol, or with a non-head symbol of another row, owes only its contextual
/// identifier; otherwise it owes its full identifier. The New-only
/// alignment scores exactly 0. Throws InvalidAlignmentError when `a` fails
/// validation or cites a pattern without an identifier.
double scoreAlignment(const Alignment& a, const Grammar& g);

/// Same quantity in fixed point, used for exact ranking.
FixedBits fixedScore(const Alignment& a, const Grammar& g);

/// Ranking order: score desc, fewer Old rows, lexicographic sorted row ids,
/// more unified cells, fewer unmatched symbols inside rows, then a canonical
/// structural key. Scores are compared in fixed point.
bool rankBefore(const Alignment& a, const Alignment& b, const Grammar& g);

/// Beam search over alignments of `newPattern` against `g`.
///
/// Iteration 0 matches the New pattern against every citable Old pattern.
/// Each later iteration flattens every alignment in the beam (unaligned
/// symbols placed early, placed late, and in an order guided by the target
/// pattern), matches the flattened sequence against every pattern not yet in
/// it, and merges each of the best fragments in as a new row. The beam keeps the `beamWidth` best distinct
/// alignments seen so far, so runners-up survive a locally worse step. An
/// entry that only undoes unifications of a better-ranked entry with the same
/// rows and score is dropped.
///
/// The result is ranked per rankBefore, holds at most `beamWidth` entries and
/// is empty only when `allOrNothing` filters everything out.
std::vector<Alignment> buildAlignments(const Pattern& newPattern, const Grammar& g, const SearchParams& params = {});

/// All ranked ways of adding `pattern` as one more row of `a`.
std::vector<Alignment> extendAlignment(const Alignment& a, PatternId pattern, const Grammar& g,
                                       const SearchParams& params = {});

}  // namespace sp
