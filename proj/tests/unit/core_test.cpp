#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "instances.hpp"
#include "sp/error.hpp"
#include "sp/grammar.hpp"
#include "sp/pattern.hpp"

namespace sp {
namespace {

TEST(Symbol, RejectsEmptyAndWhitespace) {
  EXPECT_THROW(Symbol(""), std::invalid_argument);
  EXPECT_THROW(Symbol("a b"), std::invalid_argument);
  EXPECT_THROW(Symbol("a\t"), std::invalid_argument);
  EXPECT_EQ(Symbol("#NP").text(), "#NP");
}

TEST(Symbol, EqualityIsByteEquality) {
  EXPECT_EQ(Symbol("a"), Symbol("a"));
  EXPECT_NE(Symbol("a"), Symbol("A"));
  EXPECT_NE(Symbol("e"), Symbol("\xc3\xa9"));
}

TEST(Pattern, ParseAndJoin) {
  const auto syms = parseSymbols("  t h\te \n");
  ASSERT_EQ(syms.size(), 3u);
  EXPECT_EQ(joinSymbols(syms), "t h e");
  EXPECT_TRUE(parseSymbols("   ").empty());
}

TEST(Pattern, OldRequiresPositiveFrequency) {
  EXPECT_THROW(Pattern::makeOld(1, parseSymbols("a"), 0), std::invalid_argument);
  const auto p = Pattern::makeOld(3, parseSymbols("a b"), 7);
  EXPECT_EQ(p.kind(), PatternKind::Old);
  EXPECT_EQ(p.frequency(), 7u);
  EXPECT_EQ(p.id(), 3u);
}

TEST(Corpus, SkipsBlankAndCommentLines) {
  const auto c = parseCorpus("% header\na b\n\n  \nc\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(joinSymbols(c[1].symbols()), "c");
  EXPECT_EQ(formatCorpus(c), "a b\nc\n");
}

// Code lengths recomputed from raw counts, without the grammar's own tables.
TEST(Grammar, CodeLengthsMatchFrequencyCounts) {
  const Grammar g = testing::sentenceGrammar();
  std::map<std::string, double> f;
  double w = 0;
  for (const auto& p : g.patterns()) {
    for (const auto& s : p.symbols()) f[s.text()] += static_cast<double>(p.frequency());
    w += static_cast<double>(p.frequency() * p.size());
  }
  EXPECT_EQ(w, 59.0);
  EXPECT_EQ(g.totalWeight(), 59u);
  ASSERT_EQ(g.symbolCodeLengths().size(), f.size());
  for (const auto& [text, count] : f) {
    EXPECT_NEAR(g.symbolCost(Symbol(text)), std::log2(w / count), 1e-12) << text;
  }
  EXPECT_NEAR(g.symbolCost(Symbol("t")), std::log2(59.0 / 2.0), 1e-12);
  EXPECT_NEAR(g.symbolCost(Symbol("w")), std::log2(59.0), 1e-12);
}

TEST(Grammar, CostsArePositiveWithTwoDistinctSymbols) {
  const Grammar g({Pattern::makeOld(1, parseSymbols("a b"), 3)});
  for (const auto& [s, bits] : g.symbolCodeLengths()) EXPECT_GT(bits, 0.0) << s.text();
}

TEST(Grammar, UnknownSymbolAndNovelCost) {
  const Grammar g = testing::sentenceGrammar();
  EXPECT_THROW(g.symbolCost(Symbol("zz")), UnknownSymbolError);
  EXPECT_FALSE(g.costOf("zz").has_value());
  EXPECT_DOUBLE_EQ(novelSymbolCost("zz"), 24.0);
  EXPECT_DOUBLE_EQ(g.literalCost(Symbol("zz")), 24.0);
}

// Raising freq(p) lowers cost(s) exactly when s is at least as dense in p as
// in the whole grammar, so the weak decrease holds for those symbols.
TEST(Grammar, FrequencyIncreaseLowersDenseSymbolCosts) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = testing::randomInstance(rng, 3, 4);
    const Grammar& g = inst.grammar;
    const std::size_t k = rng() % g.size();
    std::vector<Pattern> bumped;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto& p = g.patterns()[i];
      bumped.push_back(Pattern::makeOld(p.id(), p.symbols(), p.frequency() + (i == k ? 1 : 0)));
    }
    const Grammar h(bumped);
    const auto& p = g.patterns()[k];
    for (const auto& s : p.symbols()) {
      const double occ = static_cast<double>(std::count(p.symbols().begin(), p.symbols().end(), s));
      const double share = std::exp2(-g.symbolCost(s));
      if (occ / static_cast<double>(p.size()) >= share) {
        EXPECT_LE(h.symbolCost(s), g.symbolCost(s) + 1e-12);
      }
    }
    for (const auto& [s, bits] : g.symbolCodeLengths()) {
      if (std::find(p.symbols().begin(), p.symbols().end(), s) == p.symbols().end()) {
        EXPECT_GE(h.symbolCost(s), bits - 1e-12);
      }
    }
  }
}

TEST(Grammar, SparseSymbolCostCanRise) {
  const Grammar g = parseGrammar("1\ta a a a\n1\ta b c d e f g h\n");
  const Grammar h = parseGrammar("1\ta a a a\n2\ta b c d e f g h\n");
  EXPECT_GT(h.symbolCost(Symbol("a")), g.symbolCost(Symbol("a")));
}

TEST(Grammar, ParseFormatAndIds) {
  const Grammar g = parseGrammar("%SPG1\n% comment\n2\tx y\nid=9\t1\tz\n");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g.pattern(1).frequency(), 2u);
  EXPECT_EQ(joinSymbols(g.pattern(9).symbols()), "z");
  EXPECT_THROW(g.pattern(2), GrammarError);
  EXPECT_EQ(parseGrammar(g.canonicalText()), g);
}

TEST(Grammar, FormatErrorsCarryLineNumbers) {
  try {
    parseGrammar("%SPG1\n1\ta b\nnot-a-number\tc\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parseGrammar("%SPG9\n1\ta\n"), FormatError);
  EXPECT_THROW(parseGrammar("0\ta\n"), Error);
  EXPECT_THROW(parseGrammar("id=1\t1\ta\nid=1\t1\tb\n"), FormatError);
  EXPECT_THROW(Grammar({Pattern::makeOld(1, parseSymbols("a")), Pattern::makeOld(1, parseSymbols("b"))}), GrammarError);
  EXPECT_THROW(loadGrammarFile("/nonexistent/grammar.spg"), FormatError);
}

TEST(Grammar, HashTracksCanonicalText) {
  const Grammar a = parseGrammar("1\ta b\n1\tc\n");
  const Grammar b = parseGrammar("%SPG1\n1\ta   b\n\n1\tc\n");
  const Grammar c = parseGrammar("1\ta b\n2\tc\n");
  EXPECT_EQ(a.canonicalText(), b.canonicalText());
  EXPECT_EQ(a.contentHash(), b.contentHash());
  EXPECT_NE(a.contentHash(), c.contentHash());
  EXPECT_EQ(a.contentHash(), sha256(a.canonicalText()));
}

TEST(Grammar, ServiceDirective) {
  const Grammar g = testing::sentenceGrammar();
  EXPECT_TRUE(g.isService(Symbol("#NP")));
  EXPECT_TRUE(g.isService(Symbol("0a")));
  EXPECT_TRUE(g.isService(Symbol(";")));
  EXPECT_FALSE(g.isService(Symbol("a")));
  const Grammar d = parseGrammar("1\tX a #X\n");
  EXPECT_TRUE(d.isService(Symbol("X")));
  EXPECT_TRUE(d.isService(Symbol("#x")));
  EXPECT_FALSE(d.isService(Symbol("a")));
}

TEST(Identifier, SentenceIdentifiers) {
  const Grammar g = testing::sentenceGrammar();
  const std::vector<std::string> expected = {"N Nr", "N Np", "D 17", "NP 0a", "V Vp", "S", "A 21", "Num PL"};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& info = g.identifierInfo(i);
    ASSERT_TRUE(info.citable()) << info.error;
    SymbolSeq id;
    for (auto pos : info.positions) id.push_back(g.patterns()[i].symbols()[pos]);
    EXPECT_EQ(joinSymbols(id), expected[i]) << "pattern " << i + 1;
    ASSERT_FALSE(info.contextual.empty());
    EXPECT_EQ(info.contextual.front(), info.positions.front());
    EXPECT_LE(info.contextual.size(), info.positions.size());
  }
}

TEST(Identifier, UncitablePatterns) {
  const Grammar g = parseGrammar("1\ta b\n1\tX c #X\n1\tX c #X\n");
  EXPECT_FALSE(g.identifierInfo(0).citable());
  EXPECT_FALSE(g.identifierInfo(1).citable());
  EXPECT_FALSE(g.identifierInfo(2).citable());
}

}  // namespace
}  // namespace sp
