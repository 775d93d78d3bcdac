#include "sp/codec.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "sp/error.hpp"

namespace sp {

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'P', 'E', '1'};
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

FixedBits flagFixed() { return toFixed(kItemFlagBits); }

FixedBits literalFixed(const Symbol& s, const Grammar& g) { return toFixed(g.literalCost(s)) + flagFixed(); }

FixedBits identifierFixed(std::size_t ordinal, const Grammar& g) {
  const auto& info = g.identifierInfo(ordinal);
  const auto row = g.indexed(ordinal);
  FixedBits total = 0;
  for (auto pos : info.positions) total += g.fixedCostAt(row[pos]);
  return total;
}

double identifierBits(std::size_t ordinal, const Grammar& g) {
  const auto& info = g.identifierInfo(ordinal);
  const auto row = g.indexed(ordinal);
  double total = 0.0;
  for (auto pos : info.positions) total += g.costAt(row[pos]);
  return total;
}

Reference makeReference(std::size_t ordinal, const Grammar& g) {
  const auto& p = g.patterns()[ordinal];
  return Reference{p.id(), identifierRule(p, g)};
}

std::vector<std::size_t> contentPositions(std::size_t ordinal, const Grammar& g) {
  std::vector<std::size_t> out;
  const auto row = g.indexed(ordinal);
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!g.serviceAt(row[i])) out.push_back(i);
  }
  return out;
}

Encoding emptyEncoding(const Pattern& data, const Grammar& g) {
  Encoding e;
  e.grammarHash = g.contentHash();
  e.originalLength = data.size();
  return e;
}

}  // namespace

SymbolSeq contentSymbols(const Pattern& p, const Grammar& g) {
  SymbolSeq out;
  for (const auto& s : p.symbols()) {
    if (!g.isService(s)) out.push_back(s);
  }
  return out;
}

Encoding encodeLiterals(const Pattern& data, const Grammar& g) {
  Encoding e = emptyEncoding(data, g);
  for (const auto& s : data.symbols()) e.items.emplace_back(Literal{s});
  return e;
}

Encoding encodeAlignment(const Alignment& a, const Grammar& g) {
  const Pattern& data = a.newRow();
  const std::size_t n = data.size();

  // newIndex[r][j]: New position sharing a column with symbol j of row r
  std::vector<std::vector<std::size_t>> newIndex(a.rowCount());
  for (std::size_t r = 1; r < a.rowCount(); ++r) newIndex[r].assign(a.rowSymbols(r, g).size(), kNone);
  for (const auto& col : a.columns()) {
    const std::size_t i = col.indexIn(0);
    if (i == kNone) continue;
    for (const auto& c : col.cells) {
      if (c.row != 0) newIndex[c.row][c.index] = i;
    }
  }

  std::vector<std::size_t> startsAt(n, kNone);  // ordinal of the row cited at this position
  std::vector<std::size_t> runLength(n, 0);
  std::vector<std::uint8_t> claimed(n, 0);
  for (std::size_t r = 1; r < a.rowCount(); ++r) {
    const std::size_t ordinal = g.ordinalOf(a.oldRows()[r - 1]);
    if (!g.identifierInfo(ordinal).citable()) continue;
    const auto content = contentPositions(ordinal, g);
    if (content.empty()) continue;
    const std::size_t start = newIndex[r][content.front()];
    if (start == kNone || start + content.size() > n) continue;
    bool exact = true;
    for (std::size_t k = 0; k < content.size() && exact; ++k) {
      exact = newIndex[r][content[k]] == start + k && !claimed[start + k];
    }
    if (!exact) continue;
    FixedBits literal = 0;
    for (std::size_t k = 0; k < content.size(); ++k) literal += literalFixed(data.symbols()[start + k], g);
    if (identifierFixed(ordinal, g) + flagFixed() >= literal) continue;
    for (std::size_t k = 0; k < content.size(); ++k) claimed[start + k] = 1;
    startsAt[start] = ordinal;
    runLength[start] = content.size();
  }

  Encoding e = emptyEncoding(data, g);
  for (std::size_t i = 0; i < n;) {
    if (startsAt[i] != kNone) {
      e.items.emplace_back(makeReference(startsAt[i], g));
      i += runLength[i];
    } else {
      e.items.emplace_back(Literal{data.symbols()[i]});
      ++i;
    }
  }
  return e;
}

Encoding encodeSegments(const Pattern& data, const Grammar& g) {
  const std::size_t n = data.size();

  std::unordered_map<SymbolIndex, std::vector<std::size_t>> byFirst;
  std::vector<std::vector<SymbolIndex>> contents(g.size());
  std::vector<FixedBits> refCost(g.size(), 0);
  for (std::size_t o = 0; o < g.size(); ++o) {
    if (!g.identifierInfo(o).citable()) continue;
    const auto row = g.indexed(o);
    for (auto pos : contentPositions(o, g)) contents[o].push_back(row[pos]);
    if (contents[o].empty()) continue;
    refCost[o] = identifierFixed(o, g) + flagFixed();
    byFirst[contents[o].front()].push_back(o);
  }

  std::vector<std::uint32_t> seq(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto idx = g.indexOf(data.symbols()[i].text());
    seq[i] = idx ? *idx : std::numeric_limits<std::uint32_t>::max();
  }

  // best[i]: cheapest encoding of data[i..n); choice[i] = kNone for a literal
  std::vector<FixedBits> best(n + 1, 0);
  std::vector<std::size_t> choice(n, kNone);
  for (std::size_t i = n; i-- > 0;) {
    best[i] = best[i + 1] + literalFixed(data.symbols()[i], g);
    auto it = byFirst.find(seq[i]);
    if (it == byFirst.end()) continue;
    for (std::size_t o : it->second) {
      const auto& c = contents[o];
      if (i + c.size() > n || !std::equal(c.begin(), c.end(), seq.begin() + static_cast<std::ptrdiff_t>(i))) continue;
      const FixedBits cost = refCost[o] + best[i + c.size()];
      if (cost < best[i]) {
        best[i] = cost;
        choice[i] = o;
      }
    }
  }

  Encoding e = emptyEncoding(data, g);
  for (std::size_t i = 0; i < n;) {
    if (choice[i] == kNone) {
      e.items.emplace_back(Literal{data.symbols()[i]});
      ++i;
    } else {
      e.items.emplace_back(makeReference(choice[i], g));
      i += contents[choice[i]].size();
    }
  }
  return e;
}

Encoding encode(const Pattern& data, const Grammar& g, const SearchParams& params) {
  if (data.kind() != PatternKind::New) throw std::invalid_argument("encode requires a New pattern");
  if (data.empty()) return emptyEncoding(data, g);

  std::vector<Encoding> plans;
  plans.push_back(encodeAlignment(buildAlignments(data, g, params).front(), g));
  plans.push_back(encodeSegments(data, g));
  plans.push_back(encodeLiterals(data, g));

  std::size_t best = 0;
  FixedBits bestBits = fixedBitSize(plans[0], g);
  for (std::size_t k = 1; k < plans.size(); ++k) {
    const FixedBits bits = fixedBitSize(plans[k], g);
    if (bits < bestBits) {
      best = k;
      bestBits = bits;
    }
  }
  return std::move(plans[best]);
}

Pattern decode(const Encoding& e, const Grammar& g) {
  if (e.grammarHash != g.contentHash()) {
    throw DecodeError(DecodeError::Kind::HashMismatch,
                      fmt::format("encoding was made with grammar {}, not {}", toHex(e.grammarHash),
                                  toHex(g.contentHash())));
  }
  SymbolSeq out;
  out.reserve(e.originalLength);
  for (const auto& item : e.items) {
    if (const auto* ref = std::get_if<Reference>(&item)) {
      const Pattern* p = g.find(ref->pattern);
      if (!p) throw DecodeError(DecodeError::Kind::UnknownPattern, fmt::format("unknown pattern id {}", ref->pattern));
      for (const auto& s : p->symbols()) {
        if (!g.isService(s)) out.push_back(s);
      }
    } else {
      out.push_back(std::get<Literal>(item).symbol);
    }
    if (out.size() > e.originalLength) break;
  }
  if (out.size() != e.originalLength) {
    throw DecodeError(DecodeError::Kind::LengthMismatch,
                      fmt::format("decoded {} symbols, expected {}", out.size(), e.originalLength));
  }
  return Pattern::makeNew(std::move(out));
}

double bitSize(const Encoding& e, const Grammar& g) {
  double total = 0.0;
  for (const auto& item : e.items) {
    if (const auto* ref = std::get_if<Reference>(&item)) {
      total += identifierBits(g.ordinalOf(ref->pattern), g) + kItemFlagBits;
    } else {
      total += g.literalCost(std::get<Literal>(item).symbol) + kItemFlagBits;
    }
  }
  return total;
}

FixedBits fixedBitSize(const Encoding& e, const Grammar& g) {
  FixedBits total = 0;
  for (const auto& item : e.items) {
    if (const auto* ref = std::get_if<Reference>(&item)) {
      total += identifierFixed(g.ordinalOf(ref->pattern), g) + flagFixed();
    } else {
      total += literalFixed(std::get<Literal>(item).symbol, g);
    }
  }
  return total;
}

void appendVarint(std::vector<std::uint8_t>& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(value | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

std::uint64_t readVarint(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  std::uint64_t value = 0;
  for (unsigned shift = 0; shift < 64; shift += 7) {
    if (pos >= bytes.size()) throw DecodeError(DecodeError::Kind::Malformed, "truncated varint");
    const std::uint8_t b = bytes[pos++];
    if (shift == 63 && (b & 0x7e)) throw DecodeError(DecodeError::Kind::Malformed, "varint overflow");
    value |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) return value;
  }
  throw DecodeError(DecodeError::Kind::Malformed, "varint too long");
}

std::vector<std::uint8_t> writeEncoding(const Encoding& e) {
  std::vector<std::uint8_t> out(sizeof kMagic + e.grammarHash.size());
  std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
  std::copy(e.grammarHash.begin(), e.grammarHash.end(), out.begin() + sizeof kMagic);
  appendVarint(out, e.originalLength);
  appendVarint(out, e.items.size());
  for (const auto& item : e.items) {
    if (const auto* ref = std::get_if<Reference>(&item)) {
      appendVarint(out, static_cast<std::uint64_t>(ref->pattern) << 1);
    } else {
      const auto& text = std::get<Literal>(item).symbol.text();
      appendVarint(out, (static_cast<std::uint64_t>(text.size()) << 1) | 1);
      out.insert(out.end(), text.begin(), text.end());
    }
  }
  return out;
}

Encoding readEncoding(std::span<const std::uint8_t> bytes) {
  auto malformed = [](const std::string& what) { return DecodeError(DecodeError::Kind::Malformed, what); };
  if (bytes.size() < 4 + 32 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw malformed("missing SPE1 header");
  }
  Encoding e;
  std::copy_n(bytes.begin() + 4, 32, e.grammarHash.begin());
  std::size_t pos = 36;
  e.originalLength = readVarint(bytes, pos);
  const std::uint64_t count = readVarint(bytes, pos);
  if (count > bytes.size() - pos) throw malformed("item count exceeds payload");
  e.items.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint64_t header = readVarint(bytes, pos);
    if ((header & 1) == 0) {
      const std::uint64_t id = header >> 1;
      if (id > std::numeric_limits<PatternId>::max()) throw malformed("pattern id out of range");
      e.items.emplace_back(Reference{static_cast<PatternId>(id), {}});
      continue;
    }
    const std::uint64_t len = header >> 1;
    if (len > bytes.size() - pos) throw malformed("truncated literal");
    std::string text(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    try {
      e.items.emplace_back(Literal{Symbol(std::move(text))});
    } catch (const std::invalid_argument&) {
      throw malformed("literal is not a valid symbol");
    }
  }
  if (pos != bytes.size()) throw malformed("trailing bytes after last item");
  return e;
}

}  // namespace sp
