#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "oracle.hpp"
#include "sp/builder.hpp"

namespace sp {
namespace {

TEST(AlignmentOracle, NewOnlyWhenNothingMatches) {
  const Grammar g = parseGrammar("1\tX a #X\n");
  const auto r = oracle::bestAlignment(Pattern::makeNew(parseSymbols("b c")), g);
  EXPECT_EQ(r.score, 0.0);
  EXPECT_TRUE(r.rows.empty());
}

// One pattern, full match: the saving is the content minus the identifier.
TEST(AlignmentOracle, SingleRowByHand) {
  const Grammar g = parseGrammar("3\tX a b #X\n1\tY c #Y\n");
  const auto r = oracle::bestAlignment(Pattern::makeNew(parseSymbols("a b")), g);
  const auto c = [&](const char* s) { return g.symbolCost(Symbol(s)); };
  EXPECT_NEAR(r.score, c("a") + c("b") - c("X"), 1e-12);
  EXPECT_EQ(r.rows, (std::vector<PatternId>{1}));
}

TEST(AlignmentOracle, BeamNeverBeatsOptimum) {
  std::mt19937_64 rng(2024);
  std::size_t equal = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    auto inst = testing::randomInstance(rng, 3, 8);
    const auto best = oracle::bestAlignment(inst.data, inst.grammar);
    const double beam = buildAlignments(inst.data, inst.grammar).front().score();
    EXPECT_LE(beam, best.score + 1e-9) << joinSymbols(inst.data.symbols()) << "\n" << inst.grammar.canonicalText();
    if (std::abs(beam - best.score) <= 1e-9) ++equal;
  }
  EXPECT_GE(equal, trials * 98 / 100);
}

TEST(AlignmentOracle, SentenceSubsetOptimum) {
  const Grammar g = parseGrammar(
      "%SPG1\n@service #* NP D N Nr 0a 17 6\n1\tN Nr 6 a p p l e #N\n1\tD 17 t h e #D\n1\tNP 0a D #D N #N #NP\n");
  const auto s = Pattern::makeNew(parseSymbols("t h e a p p l e"));
  const auto best = oracle::bestAlignment(s, g);
  EXPECT_EQ(best.rows, (std::vector<PatternId>{1, 2, 3}));
  EXPECT_NEAR(buildAlignments(s, g).front().score(), best.score, 1e-9);
}

}  // namespace
}  // namespace sp
