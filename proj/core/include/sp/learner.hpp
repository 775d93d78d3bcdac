#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sp/builder.hpp"
#include "sp/codec.hpp"
#include "sp/grammar.hpp"

namespace sp {

struct LearnParams {
  /// Selected patterns occurring fewer times than this in the corpus are
  /// left out of G.
  std::size_t rareThreshold = 2;
  std::uint64_t seed = 0;
  /// Candidate-generation rounds after the initial pairwise unification.
  std::size_t maxPasses = 6;
  /// Item pairs unified in the first round; all pairs when the corpus is small.
  std::size_t pairSample = 4000;
  /// Candidates evaluated exactly per greedy step.
  std::size_t shortlist = 24;
  bool learnClasses = true;
  /// Used to derive the final encodings.
  SearchParams search;
};

enum class CandidateOrigin { UnifiedMatch, Residue };

struct CandidatePattern {
  SymbolSeq body;
  std::size_t support = 0;
  CandidateOrigin origin = CandidateOrigin::UnifiedMatch;
};

struct DescriptionLengths {
  double grammarBits = 0.0;
  double encodingBits = 0.0;
  double rawBits = 0.0;

  double total() const noexcept { return grammarBits + encodingBits; }
};

struct LearnResult {
  Grammar grammar;
  /// One per corpus item, in corpus order.
  std::vector<Encoding> encodings;
  DescriptionLengths ledger;
  /// Every candidate considered, ordered by body.
  std::vector<CandidatePattern> candidates;
  /// Support of each pattern in `grammar`, parallel to grammar.patterns().
  std::vector<std::size_t> support;
  /// Groups of learned patterns that occur in the same contexts. Reported
  /// only; G is not extended with them.
  std::vector<std::vector<PatternId>> classes;
};

/// Induces G and E from raw sequences.
///
/// Candidates come from unifying pairs of items (shared runs become
/// candidates, unshared stretches become residue candidates), then from the
/// literal runs and adjacent reference pairs of the current encodings. A
/// greedy add/drop search keeps the subset minimising bits(G) + bits(E).
/// Patterns with support below rareThreshold are then removed, so anything
/// rare survives only as literals in E. Learned patterns look like
/// `%gK <content...> #%gK`. Deterministic for fixed params.
///
/// Throws std::invalid_argument on an empty corpus.
LearnResult learn(const std::vector<Pattern>& corpus, const LearnParams& params = {});

/// Recomputes bits(G) and bits(E) from the result; bits(raw) is the value
/// recorded when learning.
DescriptionLengths describeLengths(const LearnResult& r);

/// Σ over patterns of (Σ symbol costs + identifier cost + 8).
double grammarBits(const Grammar& g);

/// Corpus cost under its own unigram symbol frequencies.
double rawCorpusBits(const std::vector<Pattern>& corpus);

}  // namespace sp
