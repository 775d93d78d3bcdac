#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "instances.hpp"
#include "sp/builder.hpp"
#include "sp/inference.hpp"

namespace sp {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Probabilities, EqualScoresSplitEvenly) {
  const auto p = normalizeScores({3.25, 3.25});
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[1], 0.5, 1e-12);
}

TEST(Probabilities, OneBitGapIsTwoToOne) {
  const auto p = normalizeScores({10.0, 9.0});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-12);
}

TEST(Probabilities, StableForLargeScores) {
  const auto p = normalizeScores({5000.0, 4999.0, -5000.0});
  EXPECT_NEAR(sum(p), 1.0, 1e-12);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-12);
  EXPECT_GE(p[2], 0.0);
}

TEST(Probabilities, SingleCandidateIsCertain) { EXPECT_EQ(normalizeScores({-7.0}), std::vector<double>{1.0}); }

TEST(Probabilities, EmptyCandidateListThrows) {
  EXPECT_THROW(alignmentProbabilities({}, testing::sentenceGrammar()), std::invalid_argument);
}

TEST(Probabilities, CandidateSetsSumToOne) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = testing::randomInstance(rng, 3, 8);
    const auto set = alignmentProbabilities(buildAlignments(inst.data, inst.grammar), inst.grammar);
    ASSERT_EQ(set.probabilities.size(), set.candidates.size());
    ASSERT_EQ(set.scores.size(), set.candidates.size());
    EXPECT_NEAR(sum(set.probabilities), 1.0, 1e-9);
    for (std::size_t i = 1; i < set.scores.size(); ++i) {
      const double ratio = set.probabilities[i - 1] / set.probabilities[i];
      EXPECT_NEAR(std::log2(ratio), set.scores[i - 1] - set.scores[i], 1e-9);
    }
  }
}

TEST(Inference, PartialInputPredictsTheRest) {
  const Grammar g = testing::sentenceGrammar();
  const auto best = buildAlignments(Pattern::makeNew(parseSymbols("a p p l e")), g).front();
  const auto& rows = best.oldRows();
  const auto at = std::find(rows.begin(), rows.end(), PatternId{1});
  ASSERT_NE(at, rows.end());
  const std::size_t row = static_cast<std::size_t>(at - rows.begin()) + 1;
  SymbolSeq syms;
  for (const auto& s : inferredSymbols(best, g)) {
    if (s.row == row) syms.push_back(s.symbol);
    EXPECT_NE(s.row, 0u);
  }
  EXPECT_EQ(joinSymbols(syms), "N Nr 6 #N");
}

TEST(Inference, FullParseInfersCategories) {
  const Grammar g = testing::sentenceGrammar();
  const auto best = buildAlignments(testing::sentenceItem(), g).front();
  const auto inferred = inferredSymbols(best, g);
  bool sentence = false;
  for (const auto& s : inferred) sentence |= s.symbol.text() == "S";
  EXPECT_TRUE(sentence);
  for (const auto& s : inferred) EXPECT_TRUE(g.isService(s.symbol)) << s.symbol.text();
}

}  // namespace
}  // namespace sp
