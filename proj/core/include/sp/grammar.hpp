#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sp/digest.hpp"
#include "sp/pattern.hpp"

namespace sp {

/// Decides which symbols are service (identifier / bracket) symbols rather
/// than content. Without an explicit `@service` directive a symbol is a
/// service symbol when it starts with `#` or consists only of `[A-Z0-9]`.
/// A directive replaces the default: each entry matches exactly, or as a
/// prefix when it ends in `*`.
class ServiceRule {
 public:
  ServiceRule() = default;
  static ServiceRule fromDirective(std::vector<std::string> entries);

  bool isService(std::string_view symbol) const;
  bool explicitDirective() const noexcept { return explicit_; }
  const std::vector<std::string>& entries() const noexcept { return entries_; }

  friend bool operator==(const ServiceRule&, const ServiceRule&) = default;

 private:
  std::vector<std::string> entries_;
  bool explicit_ = false;
};

using SymbolIndex = std::uint32_t;

/// Bits in fixed point (2^-40 bit resolution). Used wherever search or
/// ranking needs exact ties.
using FixedBits = std::int64_t;
inline constexpr double kFixedScale = 1099511627776.0;

inline FixedBits toFixed(double bits) { return static_cast<FixedBits>(std::llround(bits * kFixedScale)); }
inline double fromFixed(FixedBits fixed) { return static_cast<double>(fixed) / kFixedScale; }

/// Cost of a symbol the grammar has never seen: 8 bits per byte plus an
/// 8-bit length field.
double novelSymbolCost(std::string_view symbol);

/// Which symbol positions of a pattern form its identifier, or why it has none.
struct IdentifierInfo {
  /// Symbols that cite the pattern on its own.
  std::vector<std::size_t> positions;
  /// Prefix of `positions` that still has to be supplied once the head symbol
  /// is provided by another row of an alignment.
  std::vector<std::size_t> contextual;
  std::string error;

  bool citable() const noexcept { return error.empty(); }
};

/// The store of Old patterns plus the per-symbol code lengths derived from
/// their frequencies. Immutable once constructed.
class Grammar {
 public:
  Grammar();
  /// Throws GrammarError on duplicate ids, empty patterns, New patterns or
  /// zero frequencies.
  explicit Grammar(std::vector<Pattern> patterns, ServiceRule rule = {});

  /// Sorted by id.
  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }
  std::size_t size() const noexcept { return patterns_.size(); }
  bool empty() const noexcept { return patterns_.empty(); }

  const Pattern* find(PatternId id) const;
  /// Throws GrammarError for an unknown id.
  const Pattern& pattern(PatternId id) const;
  std::size_t ordinalOf(PatternId id) const;

  /// Throws UnknownSymbolError when `s` does not occur in any pattern.
  double symbolCost(const Symbol& s) const;
  std::optional<double> costOf(std::string_view s) const;
  /// Grammar cost when known, novelSymbolCost otherwise.
  double literalCost(const Symbol& s) const;

  const std::map<Symbol, double>& symbolCodeLengths() const noexcept { return codeLengths_; }
  std::uint64_t totalWeight() const noexcept { return totalWeight_; }
  const Digest& contentHash() const noexcept { return hash_; }

  const ServiceRule& serviceRule() const noexcept { return rule_; }
  bool isService(const Symbol& s) const { return rule_.isService(s.text()); }

  /// Canonical serialization: header, optional directive, one line per pattern.
  const std::string& canonicalText() const noexcept { return canonical_; }

  // Interned view used by the search and codec hot paths.
  std::size_t symbolCount() const noexcept { return symbols_.size(); }
  std::optional<SymbolIndex> indexOf(std::string_view s) const;
  const Symbol& symbolAt(SymbolIndex i) const { return symbols_.at(i); }
  double costAt(SymbolIndex i) const { return costs_[i]; }
  FixedBits fixedCostAt(SymbolIndex i) const { return fixedCosts_[i]; }
  bool serviceAt(SymbolIndex i) const { return service_[i] != 0; }
  /// Interned symbols of the pattern at `ordinal` (its position in patterns()).
  std::span<const SymbolIndex> indexed(std::size_t ordinal) const { return indexed_.at(ordinal); }
  const IdentifierInfo& identifierInfo(std::size_t ordinal) const { return identifiers_.at(ordinal); }

  friend bool operator==(const Grammar& a, const Grammar& b) {
    return a.patterns_ == b.patterns_ && a.rule_ == b.rule_ && a.hash_ == b.hash_;
  }

 private:
  void index();

  std::vector<Pattern> patterns_;
  ServiceRule rule_;
  std::unordered_map<PatternId, std::size_t> byId_;
  std::map<Symbol, double> codeLengths_;
  std::uint64_t totalWeight_ = 0;
  std::string canonical_;
  Digest hash_{};

  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, SymbolIndex> symbolIndex_;
  std::vector<double> costs_;
  std::vector<FixedBits> fixedCosts_;
  std::vector<std::uint8_t> service_;
  std::vector<std::vector<SymbolIndex>> indexed_;
  std::vector<IdentifierInfo> identifiers_;
};

/// Parses the `%SPG1` text format. Throws FormatError (with line number) or
/// GrammarError.
Grammar loadGrammar(std::istream& in);
Grammar parseGrammar(std::string_view text);
Grammar loadGrammarFile(const std::string& path);

void saveGrammar(const Grammar& g, std::ostream& out);
std::string saveGrammar(const Grammar& g);

double symbolCost(const Grammar& g, const Symbol& s);

}  // namespace sp
