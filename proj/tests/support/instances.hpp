#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sp/grammar.hpp"
#include "sp/pattern.hpp"

namespace sp::testing {

struct Instance {
  Grammar grammar;
  Pattern data = Pattern::makeNew({});
};

/// A few bracketed patterns `H [k] content... #H` over a small alphabet,
/// some sharing a head symbol, some nesting another pattern's brackets, and
/// a New pattern stitched from their contents plus noise.
Instance randomInstance(std::mt19937_64& rng, std::size_t maxPatterns, std::size_t maxNewLength,
                        std::size_t maxContent = 4, std::size_t alphabet = 5);

/// Eight-pattern grammar of "the apples are sweet", and that sentence.
Grammar sentenceGrammar();
Pattern sentenceItem();

/// Raw text built from `words` with no delimiters, one letter per symbol.
struct WordCorpus {
  std::vector<std::string> words;
  std::vector<Pattern> items;
  /// Word boundaries inside each item (offsets of every word end but the last).
  std::vector<std::vector<std::size_t>> boundaries;
};

WordCorpus wordCorpus(const std::vector<std::string>& words, std::size_t items, std::size_t minWords,
                      std::size_t maxWords, std::uint64_t seed);

}  // namespace sp::testing
