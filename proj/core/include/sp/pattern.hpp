#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sp {

/// An atomic token. Two symbols match iff their bytes are identical.
class Symbol {
 public:
  /// Throws std::invalid_argument when `text` is empty or contains whitespace.
  explicit Symbol(std::string text);

  const std::string& text() const noexcept { return text_; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;

 private:
  std::string text_;
};

using SymbolSeq = std::vector<Symbol>;

/// Splits on ASCII whitespace.
SymbolSeq parseSymbols(std::string_view text);
std::string joinSymbols(std::span<const Symbol> symbols);

enum class PatternKind { New, Old };

using PatternId = std::uint32_t;

class Pattern {
 public:
  static Pattern makeNew(SymbolSeq symbols);
  /// `frequency` must be >= 1.
  static Pattern makeOld(PatternId id, SymbolSeq symbols, std::uint64_t frequency = 1);

  const SymbolSeq& symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  PatternKind kind() const noexcept { return kind_; }
  std::uint64_t frequency() const noexcept { return frequency_; }
  PatternId id() const noexcept { return id_; }

  friend bool operator==(const Pattern&, const Pattern&) = default;

 private:
  Pattern(PatternKind kind, PatternId id, SymbolSeq symbols, std::uint64_t frequency);

  PatternKind kind_;
  PatternId id_;
  SymbolSeq symbols_;
  std::uint64_t frequency_;
};

/// One New pattern per non-blank line; lines starting with `%` are comments.
std::vector<Pattern> parseCorpus(std::string_view text);
/// Throws FormatError when the file cannot be read.
std::vector<Pattern> loadCorpusFile(const std::string& path);
/// Inverse of parseCorpus for non-empty items.
std::string formatCorpus(const std::vector<Pattern>& corpus);

}  // namespace sp
