#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sp/alignment.hpp"
#include "sp/builder.hpp"
#include "sp/digest.hpp"
#include "sp/grammar.hpp"

namespace sp {

/// Cites an Old pattern. `identifiers` is informational: the wire format
/// carries only the pattern id, and readEncoding leaves it empty.
struct Reference {
  PatternId pattern = 0;
  SymbolSeq identifiers;

  friend bool operator==(const Reference& a, const Reference& b) { return a.pattern == b.pattern; }
};

struct Literal {
  Symbol symbol;

  friend bool operator==(const Literal&, const Literal&) = default;
};

using Item = std::variant<Reference, Literal>;

struct Encoding {
  std::vector<Item> items;
  Digest grammarHash{};
  std::size_t originalLength = 0;

  friend bool operator==(const Encoding&, const Encoding&) = default;
};

/// Cost of the per-item flag that distinguishes references from literals.
inline constexpr double kItemFlagBits = 1.0;

/// Leading service symbols of `p` that identify it within `g`. Throws
/// IdentifierError when `p` has no service symbols or cannot be told apart
/// from another pattern, GrammarError when `p` is not in `g`.
SymbolSeq identifierRule(const Pattern& p, const Grammar& g);

/// The non-service symbols of `p`, which is what a Reference reproduces.
SymbolSeq contentSymbols(const Pattern& p, const Grammar& g);

/// Cheapest of three plans, compared in fixed point: citing the rows of the
/// best alignment whose content covers a contiguous stretch of the data, an
/// optimal segmentation into whole pattern contents, and all literals.
Encoding encode(const Pattern& data, const Grammar& g, const SearchParams& params = {});

/// Rows of `a` whose content symbols are matched, in order, by one
/// contiguous run of New symbols become References at the start of that
/// run; everything else is a Literal. A reference that would cost more than
/// its literals is replaced by them.
Encoding encodeAlignment(const Alignment& a, const Grammar& g);

/// Minimum-cost segmentation of `data` into literals and whole pattern
/// contents. Patterns may repeat.
Encoding encodeSegments(const Pattern& data, const Grammar& g);

Encoding encodeLiterals(const Pattern& data, const Grammar& g);

/// Throws DecodeError on hash mismatch, unknown pattern id or length mismatch.
Pattern decode(const Encoding& e, const Grammar& g);

/// Σ over references of (identifier cost + flag) plus Σ over literals of
/// (literal cost + flag), in bits.
double bitSize(const Encoding& e, const Grammar& g);
FixedBits fixedBitSize(const Encoding& e, const Grammar& g);

/// `SPE1` container: magic, 32-byte grammar hash, LEB128 original length,
/// LEB128 item count, then per item a LEB128 header whose low bit is the tag
/// (0 reference: header >> 1 is the pattern id; 1 literal: header >> 1 is the
/// UTF-8 byte length, followed by the bytes).
std::vector<std::uint8_t> writeEncoding(const Encoding& e);
/// Throws DecodeError(Malformed) on any structural problem.
Encoding readEncoding(std::span<const std::uint8_t> bytes);

void appendVarint(std::vector<std::uint8_t>& out, std::uint64_t value);
/// Advances `pos`. Throws DecodeError(Malformed) on truncation or overflow.
std::uint64_t readVarint(std::span<const std::uint8_t> bytes, std::size_t& pos);

}  // namespace sp
