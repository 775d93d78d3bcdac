#include <algorithm>

#include <fmt/format.h>

#include "identifier_rule.hpp"
#include "sp/codec.hpp"
#include "sp/error.hpp"

namespace sp {

namespace detail {

namespace {

std::vector<std::size_t> servicePositions(const Pattern& p, const ServiceRule& rule) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (rule.isService(p.symbols()[i].text())) out.push_back(i);
  }
  return out;
}

}  // namespace

// The identifier is a leading run of the pattern's service symbols. When the
// head symbol also occurs inside another pattern it acts as a class marker
// (e.g. "D" in "NP 0a D #D ..."), so a citation also needs the next service
// symbol. Beyond that the run grows until it differs from every other
// pattern whose service symbols start with the same head. The shorter run
// that only separates rivals is kept as the contextual identifier.
IdentifierInfo computeIdentifier(std::span<const Pattern> patterns, const ServiceRule& rule,
                                 std::size_t ordinal) {
  const Pattern& p = patterns[ordinal];
  IdentifierInfo info;
  const auto own = servicePositions(p, rule);
  if (own.empty()) {
    info.error = fmt::format("pattern {} has no service symbols", p.id());
    return info;
  }
  const Symbol& head = p.symbols()[own.front()];

  bool referenced = false;
  std::vector<std::vector<std::size_t>> rivals;
  std::vector<std::size_t> rivalOrdinals;
  for (std::size_t q = 0; q < patterns.size(); ++q) {
    if (q == ordinal) continue;
    const auto& syms = patterns[q].symbols();
    if (std::find(syms.begin(), syms.end(), head) != syms.end()) referenced = true;
    auto qs = servicePositions(patterns[q], rule);
    if (!qs.empty() && syms[qs.front()] == head) {
      rivals.push_back(std::move(qs));
      rivalOrdinals.push_back(q);
    }
  }

  auto distinctAt = [&](std::size_t k) {
    for (std::size_t r = 0; r < rivals.size(); ++r) {
      const auto& qs = rivals[r];
      if (qs.size() < k) continue;
      const auto& qsyms = patterns[rivalOrdinals[r]].symbols();
      bool same = true;
      for (std::size_t i = 0; i < k && same; ++i) same = p.symbols()[own[i]] == qsyms[qs[i]];
      if (same) return false;
    }
    return true;
  };

  const std::size_t kmin = (referenced && own.size() >= 2) ? 2 : 1;
  for (std::size_t k = 1; k <= own.size(); ++k) {
    if (!distinctAt(k)) continue;
    const std::size_t standalone = std::max(k, kmin);
    info.contextual.assign(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(k));
    info.positions.assign(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(standalone));
    return info;
  }

  for (std::size_t r = 0; r < rivals.size(); ++r) {
    const auto& qs = rivals[r];
    if (qs.size() != own.size()) continue;
    const auto& qsyms = patterns[rivalOrdinals[r]].symbols();
    bool same = true;
    for (std::size_t i = 0; i < own.size() && same; ++i) same = p.symbols()[own[i]] == qsyms[qs[i]];
    if (same) {
      info.error = fmt::format("pattern {} is indistinguishable from pattern {}", p.id(),
                               patterns[rivalOrdinals[r]].id());
      return info;
    }
  }
  info.error = fmt::format("pattern {} has no distinguishing identifier", p.id());
  return info;
}

}  // namespace detail

SymbolSeq identifierRule(const Pattern& p, const Grammar& g) {
  if (p.kind() != PatternKind::Old) throw IdentifierError("identifierRule requires an Old pattern");
  const std::size_t ordinal = g.ordinalOf(p.id());
  if (!(g.patterns()[ordinal] == p)) {
    throw GrammarError(fmt::format("pattern {} does not belong to the grammar", p.id()));
  }
  const auto& info = g.identifierInfo(ordinal);
  if (!info.citable()) throw IdentifierError(info.error);
  SymbolSeq out;
  for (auto pos : info.positions) out.push_back(p.symbols()[pos]);
  return out;
}

}  // namespace sp
