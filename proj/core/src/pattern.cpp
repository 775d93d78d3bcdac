#include "sp/pattern.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sp/error.hpp"

namespace sp {

namespace {

bool isSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

Symbol::Symbol(std::string text) : text_(std::move(text)) {
  if (text_.empty()) throw std::invalid_argument("symbol text is empty");
  for (char c : text_) {
    if (isSpace(c)) throw std::invalid_argument("symbol contains whitespace: '" + text_ + "'");
  }
}

SymbolSeq parseSymbols(std::string_view text) {
  SymbolSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && isSpace(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !isSpace(text[i])) ++i;
    if (i > start) out.emplace_back(std::string(text.substr(start, i - start)));
  }
  return out;
}

std::string joinSymbols(std::span<const Symbol> symbols) {
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out.push_back(' ');
    out += symbols[i].text();
  }
  return out;
}

Pattern::Pattern(PatternKind kind, PatternId id, SymbolSeq symbols, std::uint64_t frequency)
    : kind_(kind), id_(id), symbols_(std::move(symbols)), frequency_(frequency) {}

Pattern Pattern::makeNew(SymbolSeq symbols) { return Pattern(PatternKind::New, 0, std::move(symbols), 1); }

Pattern Pattern::makeOld(PatternId id, SymbolSeq symbols, std::uint64_t frequency) {
  if (frequency < 1) throw std::invalid_argument("Old pattern frequency must be >= 1");
  return Pattern(PatternKind::Old, id, std::move(symbols), frequency);
}

std::vector<Pattern> parseCorpus(std::string_view text) {
  std::vector<Pattern> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.front() == '%') continue;
    auto symbols = parseSymbols(line);
    if (!symbols.empty()) out.push_back(Pattern::makeNew(std::move(symbols)));
  }
  return out;
}

std::vector<Pattern> loadCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseCorpus(buf.str());
}

std::string formatCorpus(const std::vector<Pattern>& corpus) {
  std::string out;
  for (const auto& p : corpus) {
    out += joinSymbols(p.symbols());
    out += '\n';
  }
  return out;
}

}  // namespace sp
