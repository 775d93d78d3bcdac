#pragma once

#include <cstddef>
#include <vector>

#include "sp/alignment.hpp"
#include "sp/grammar.hpp"

namespace sp {

struct ScoredCandidateSet {
  std::vector<Alignment> candidates;
  std::vector<double> scores;
  /// 2^score normalised over the set; parallel to `candidates`.
  std::vector<double> probabilities;
};

/// Scores every candidate against `g` and normalises 2^score over the set.
/// Throws std::invalid_argument on an empty list.
ScoredCandidateSet alignmentProbabilities(std::vector<Alignment> candidates, const Grammar& g);

/// Relative probabilities for raw scores, computed stably.
std::vector<double> normalizeScores(const std::vector<double>& scores);

struct InferredSymbol {
  std::size_t row = 0;
  Symbol symbol;

  friend bool operator==(const InferredSymbol&, const InferredSymbol&) = default;
};

/// Old-row symbol occurrences that no column ties to the New pattern, in
/// flattened (early-placement) order. These are what the alignment predicts
/// beyond the input.
std::vector<InferredSymbol> inferredSymbols(const Alignment& a, const Grammar& g);

}  // namespace sp
