#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "instances.hpp"
#include "sp/builder.hpp"
#include "sp/inference.hpp"
#include "sp/render.hpp"

namespace sp {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string sentenceRecords() {
  const Grammar g = testing::sentenceGrammar();
  const auto set = alignmentProbabilities(buildAlignments(testing::sentenceItem(), g), g);
  std::ostringstream out;
  writeRecords(out, set.candidates, set.probabilities, g);
  return out.str();
}

TEST(Records, MatchGoldenFile) {
  const std::string golden = slurp(std::string(SP_TEST_DATA_DIR) + "/sentence.records");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(sentenceRecords(), golden);
}

TEST(Records, SchemaAndStructure) {
  const std::string text = sentenceRecords();
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kRecordSchema);
  std::size_t alignments = 0, ends = 0;
  while (std::getline(in, line)) {
    if (line.rfind("alignment ", 0) == 0) ++alignments;
    if (line == "end") ++ends;
  }
  EXPECT_GT(alignments, 0u);
  EXPECT_EQ(alignments, ends);
}

TEST(Layout, RowsNumberedAtBothEnds) {
  const Grammar g = testing::sentenceGrammar();
  const auto best = buildAlignments(testing::sentenceItem(), g).front();
  const std::string text = renderAlignment(best, g);
  std::istringstream in(text);
  std::string line;
  std::size_t rowLines = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == ' ') continue;
    ++rowLines;
    const auto last = line.find_last_not_of(' ');
    EXPECT_EQ(line.substr(0, line.find(' ')), line.substr(line.find_last_of(' ', last) + 1, last)) << line;
  }
  EXPECT_EQ(rowLines, best.rowCount());
  EXPECT_NE(text.find('|'), std::string::npos);
  EXPECT_NE(text.find("t h e"), std::string::npos);
}

TEST(Layout, WrapsToWidth) {
  const Grammar g = testing::sentenceGrammar();
  const auto best = buildAlignments(testing::sentenceItem(), g).front();
  const std::string text = renderAlignment(best, g, 60);
  std::istringstream in(text);
  std::string line;
  std::size_t widest = 0;
  while (std::getline(in, line)) widest = std::max(widest, line.size());
  EXPECT_LE(widest, 60u);
  EXPECT_LT(renderAlignment(best, g).find('\n'), text.size());
}

}  // namespace
}  // namespace sp
