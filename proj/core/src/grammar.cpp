#include "sp/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "identifier_rule.hpp"
#include "sp/error.hpp"

namespace sp {

FormatError::FormatError(std::size_t line, const std::string& message)
    : Error(line ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

ServiceRule ServiceRule::fromDirective(std::vector<std::string> entries) {
  ServiceRule rule;
  rule.entries_ = std::move(entries);
  rule.explicit_ = true;
  return rule;
}

bool ServiceRule::isService(std::string_view symbol) const {
  if (!explicit_) {
    if (symbol.empty()) return false;
    if (symbol.front() == '#') return true;
    return std::all_of(symbol.begin(), symbol.end(),
                       [](char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); });
  }
  for (const auto& e : entries_) {
    if (!e.empty() && e.back() == '*') {
      std::string_view prefix(e.data(), e.size() - 1);
      if (symbol.substr(0, prefix.size()) == prefix) return true;
    } else if (symbol == e) {
      return true;
    }
  }
  return false;
}

double novelSymbolCost(std::string_view symbol) { return 8.0 * static_cast<double>(symbol.size()) + 8.0; }

Grammar::Grammar() { index(); }

Grammar::Grammar(std::vector<Pattern> patterns, ServiceRule rule)
    : patterns_(std::move(patterns)), rule_(std::move(rule)) {
  std::sort(patterns_.begin(), patterns_.end(), [](const Pattern& a, const Pattern& b) { return a.id() < b.id(); });
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    const auto& p = patterns_[i];
    if (p.kind() != PatternKind::Old) throw GrammarError("grammar patterns must be Old patterns");
    if (p.empty()) throw GrammarError(fmt::format("pattern {} is empty", p.id()));
    if (p.frequency() < 1) throw GrammarError(fmt::format("pattern {} has frequency < 1", p.id()));
    if (i > 0 && patterns_[i - 1].id() == p.id()) throw GrammarError(fmt::format("duplicate pattern id {}", p.id()));
  }
  index();
}

void Grammar::index() {
  byId_.clear();
  for (std::size_t i = 0; i < patterns_.size(); ++i) byId_.emplace(patterns_[i].id(), i);

  std::vector<std::uint64_t> counts;
  totalWeight_ = 0;
  indexed_.assign(patterns_.size(), {});
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    const auto& p = patterns_[i];
    totalWeight_ += p.frequency() * p.size();
    auto& row = indexed_[i];
    row.reserve(p.size());
    for (const auto& s : p.symbols()) {
      auto [it, inserted] = symbolIndex_.try_emplace(s.text(), static_cast<SymbolIndex>(symbols_.size()));
      if (inserted) {
        symbols_.push_back(s);
        counts.push_back(0);
      }
      counts[it->second] += p.frequency();
      row.push_back(it->second);
    }
  }

  costs_.resize(symbols_.size());
  fixedCosts_.resize(symbols_.size());
  service_.resize(symbols_.size());
  codeLengths_.clear();
  const double total = static_cast<double>(totalWeight_);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const double c = std::log2(total / static_cast<double>(counts[i]));
    costs_[i] = c;
    fixedCosts_[i] = toFixed(c);
    service_[i] = rule_.isService(symbols_[i].text()) ? 1 : 0;
    codeLengths_.emplace(symbols_[i], c);
  }

  identifiers_.clear();
  identifiers_.reserve(patterns_.size());
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    identifiers_.push_back(detail::computeIdentifier(patterns_, rule_, i));
  }

  std::string text = "%SPG1\n";
  if (rule_.explicitDirective()) {
    text += "@service";
    for (const auto& e : rule_.entries()) {
      text += ' ';
      text += e;
    }
    text += '\n';
  }
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    const auto& p = patterns_[i];
    if (p.id() != i + 1) text += fmt::format("id={}\t", p.id());
    text += fmt::format("{}\t", p.frequency());
    text += joinSymbols(p.symbols());
    text += '\n';
  }
  canonical_ = std::move(text);
  hash_ = sha256(canonical_);
}

const Pattern* Grammar::find(PatternId id) const {
  auto it = byId_.find(id);
  return it == byId_.end() ? nullptr : &patterns_[it->second];
}

const Pattern& Grammar::pattern(PatternId id) const { return patterns_[ordinalOf(id)]; }

std::size_t Grammar::ordinalOf(PatternId id) const {
  auto it = byId_.find(id);
  if (it == byId_.end()) throw GrammarError(fmt::format("unknown pattern id {}", id));
  return it->second;
}

std::optional<SymbolIndex> Grammar::indexOf(std::string_view s) const {
  auto it = symbolIndex_.find(std::string(s));
  if (it == symbolIndex_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Grammar::costOf(std::string_view s) const {
  auto i = indexOf(s);
  if (!i) return std::nullopt;
  return costs_[*i];
}

double Grammar::symbolCost(const Symbol& s) const {
  auto c = costOf(s.text());
  if (!c) throw UnknownSymbolError("symbol '" + s.text() + "' does not occur in the grammar");
  return *c;
}

double Grammar::literalCost(const Symbol& s) const {
  auto c = costOf(s.text());
  return c ? *c : novelSymbolCost(s.text());
}

double symbolCost(const Grammar& g, const Symbol& s) { return g.symbolCost(s); }

namespace {

std::vector<std::string_view> splitTabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

template <typename T>
bool parseUnsigned(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Grammar loadGrammar(std::istream& in) {
  std::vector<Pattern> patterns;
  std::unordered_set<PatternId> seen;
  std::optional<ServiceRule> rule;
  std::string line;
  std::size_t lineNo = 0;
  std::size_t ordinal = 0;

  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;

    if (line.front() == '%') {
      if (line.rfind("%SPG", 0) == 0 && line != "%SPG1") {
        throw FormatError(lineNo, "unsupported grammar format version '" + line + "'");
      }
      continue;
    }

    if (line.front() == '@') {
      auto tokens = parseSymbols(std::string_view(line).substr(1));
      if (tokens.empty()) throw FormatError(lineNo, "empty directive");
      const auto& name = tokens.front().text();
      if (name == "service") {
        if (rule) throw FormatError(lineNo, "duplicate @service directive");
        std::vector<std::string> entries;
        for (std::size_t i = 1; i < tokens.size(); ++i) entries.push_back(tokens[i].text());
        rule = ServiceRule::fromDirective(std::move(entries));
      } else if (name == "dim") {
        if (tokens.size() != 2 || tokens[1].text() != "1") {
          throw FormatError(lineNo, "two-dimensional patterns are not supported");
        }
      } else {
        throw FormatError(lineNo, "unknown directive '@" + name + "'");
      }
      continue;
    }

    auto fields = splitTabs(line);
    std::size_t f = 0;
    ++ordinal;
    PatternId id = static_cast<PatternId>(ordinal);
    if (fields[0].rfind("id=", 0) == 0) {
      if (!parseUnsigned(fields[0].substr(3), id) || id == 0) {
        throw FormatError(lineNo, "malformed id field '" + std::string(fields[0]) + "'");
      }
      ++f;
    }
    if (fields.size() < f + 2) throw FormatError(lineNo, "expected '<frequency>\\t<symbols>'");

    std::uint64_t frequency = 0;
    const auto freqText = fields[f];
    if (!freqText.empty() && freqText.front() == '-') throw FormatError(lineNo, "frequency must be >= 1");
    if (!parseUnsigned(freqText, frequency)) {
      throw FormatError(lineNo, "malformed frequency '" + std::string(freqText) + "'");
    }
    if (frequency < 1) throw FormatError(lineNo, "frequency must be >= 1");

    for (std::size_t extra = f + 2; extra < fields.size(); ++extra) {
      if (!blank(fields[extra])) throw FormatError(lineNo, "two-dimensional patterns are not supported");
    }

    auto symbols = parseSymbols(fields[f + 1]);
    if (symbols.empty()) throw FormatError(lineNo, "empty pattern body");
    if (!seen.insert(id).second) throw FormatError(lineNo, fmt::format("duplicate pattern id {}", id));
    patterns.push_back(Pattern::makeOld(id, std::move(symbols), frequency));
  }
  if (in.bad()) throw FormatError(0, "read error");
  return Grammar(std::move(patterns), rule.value_or(ServiceRule{}));
}

Grammar parseGrammar(std::string_view text) {
  std::istringstream in{std::string(text)};
  return loadGrammar(in);
}

Grammar loadGrammarFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open grammar file '" + path + "'");
  return loadGrammar(in);
}

void saveGrammar(const Grammar& g, std::ostream& out) { out << g.canonicalText(); }

std::string saveGrammar(const Grammar& g) { return g.canonicalText(); }

}  // namespace sp
