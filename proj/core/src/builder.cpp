#include "sp/builder.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "sp/error.hpp"

namespace sp {

namespace {

constexpr std::uint32_t kForeign = 0x80000000u;

// Per-row marks of which symbol occurrences sit in some column.
std::vector<std::vector<std::uint8_t>> alignedMarks(const Alignment& a, const Grammar& g) {
  std::vector<std::vector<std::uint8_t>> marks(a.rowCount());
  for (std::size_t r = 0; r < a.rowCount(); ++r) marks[r].assign(a.rowSymbols(r, g).size(), 0);
  for (const auto& col : a.columns()) {
    for (const auto& c : col.cells) marks[c.row][c.index] = 1;
  }
  return marks;
}

// A head symbol is supplied by its column only when some other cell there is
// New or a non-head occurrence, so two rows cannot discharge each other's
// identifiers by unifying their heads.
std::vector<std::uint8_t> suppliedHeads(const Alignment& a, const Grammar& g) {
  std::vector<std::size_t> head(a.rowCount(), static_cast<std::size_t>(-1));
  for (std::size_t r = 1; r < a.rowCount(); ++r) {
    const auto& info = g.identifierInfo(g.ordinalOf(a.oldRows()[r - 1]));
    if (!info.citable()) throw InvalidAlignmentError(info.error);
    head[r] = info.positions.front();
  }
  std::vector<std::uint8_t> supplied(a.rowCount(), 0);
  for (const auto& col : a.columns()) {
    std::size_t suppliers = 0;
    for (const auto& c : col.cells) suppliers += (c.row == 0 || c.index != head[c.row]) ? 1 : 0;
    if (suppliers == 0) continue;
    for (const auto& c : col.cells) {
      if (c.row != 0 && c.index == head[c.row]) supplied[c.row] = 1;
    }
  }
  return supplied;
}

template <typename Bits, typename CostFn>
Bits scoreWith(const Alignment& a, const Grammar& g, CostFn cost) {
  Bits raw{};
  Bits enc{};
  for (const auto& col : a.columns()) {
    const std::size_t i = col.indexIn(0);
    if (i == static_cast<std::size_t>(-1)) continue;
    auto idx = g.indexOf(a.newRow().symbols()[i].text());
    if (!idx) throw InvalidAlignmentError("matched New symbol is unknown to the grammar");
    raw += cost(*idx);
  }
  const auto marks = alignedMarks(a, g);
  const auto supplied = suppliedHeads(a, g);
  for (std::size_t r = 1; r < a.rowCount(); ++r) {
    const std::size_t ordinal = g.ordinalOf(a.oldRows()[r - 1]);
    const auto& info = g.identifierInfo(ordinal);
    const auto row = g.indexed(ordinal);
    if (supplied[r]) {
      for (auto pos : info.contextual) {
        if (!marks[r][pos]) enc += cost(row[pos]);
      }
    } else {
      for (auto pos : info.positions) {
        if (pos == info.positions.front() || !marks[r][pos]) enc += cost(row[pos]);
      }
    }
  }
  return raw - enc;
}

void requireValid(const Alignment& a, const Grammar& g) {
  auto report = validateAlignment(a, g);
  if (!report.ok()) throw InvalidAlignmentError(report.errors.front());
}

FixedBits fixedScoreUnchecked(const Alignment& a, const Grammar& g) {
  return scoreWith<FixedBits>(a, g, [&](SymbolIndex i) { return g.fixedCostAt(i); });
}

double doubleScoreUnchecked(const Alignment& a, const Grammar& g) {
  return scoreWith<double>(a, g, [&](SymbolIndex i) { return g.costAt(i); });
}

// Sorted column descriptors, each a sorted list of (pattern id, index) cells.
// Independent of row order and column order.
std::vector<std::string> columnSignatures(const Alignment& a) {
  std::vector<std::string> cols;
  cols.reserve(a.columns().size());
  std::vector<std::pair<PatternId, std::size_t>> cells;
  for (const auto& col : a.columns()) {
    cells.clear();
    for (const auto& c : col.cells) cells.emplace_back(c.row == 0 ? 0 : a.oldRows()[c.row - 1], c.index);
    std::sort(cells.begin(), cells.end());
    std::string sig;
    for (const auto& [id, index] : cells) sig += fmt::format("{}:{} ", id, index);
    cols.push_back(std::move(sig));
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::string structuralKey(const std::vector<PatternId>& rowIds, const std::vector<std::string>& columns) {
  std::string key;
  for (auto id : rowIds) key += fmt::format("{},", id);
  key += '|';
  for (const auto& col : columns) {
    key += col;
    key += ';';
  }
  return key;
}

struct Scored {
  Alignment alignment;
  FixedBits score = 0;
  std::vector<PatternId> rowIds;
  std::size_t cells = 0;
  std::size_t gaps = 0;
  std::vector<std::string> columns;
  std::string key;
};

// Unmatched occurrences lying inside each row's matched span.
std::size_t interiorGaps(const Alignment& a) {
  std::vector<std::size_t> first(a.rowCount(), static_cast<std::size_t>(-1));
  std::vector<std::size_t> last(a.rowCount(), 0);
  std::vector<std::size_t> count(a.rowCount(), 0);
  for (const auto& col : a.columns()) {
    for (const auto& c : col.cells) {
      first[c.row] = std::min(first[c.row], c.index);
      last[c.row] = std::max(last[c.row], c.index);
      ++count[c.row];
    }
  }
  std::size_t gaps = 0;
  for (std::size_t r = 0; r < a.rowCount(); ++r) {
    if (count[r]) gaps += last[r] - first[r] + 1 - count[r];
  }
  return gaps;
}

Scored makeScored(Alignment a, FixedBits score) {
  Scored s;
  s.rowIds = a.sortedRowIds();
  s.columns = columnSignatures(a);
  s.key = structuralKey(s.rowIds, s.columns);
  s.gaps = interiorGaps(a);
  for (const auto& col : a.columns()) s.cells += col.cells.size();
  s.score = score;
  s.alignment = std::move(a);
  return s;
}

bool scoredLess(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.rowIds.size() != b.rowIds.size()) return a.rowIds.size() < b.rowIds.size();
  if (a.rowIds != b.rowIds) return a.rowIds < b.rowIds;
  if (a.cells != b.cells) return a.cells > b.cells;
  if (a.gaps != b.gaps) return a.gaps < b.gaps;
  return a.key < b.key;
}

// Grammar-derived tables reused across every expansion of one search.
struct SearchContext {
  const Grammar& g;
  SearchParams params;
  std::vector<std::uint32_t> newSymbols;
  std::vector<std::size_t> citable;
  enum class Role : std::uint8_t { None, Head, Contextual, Standalone };
  std::vector<std::vector<Role>> roles;        // per ordinal, per position
  std::vector<std::vector<FixedBits>> idGain;  // per ordinal, per position, as a new row

  SearchContext(const Grammar& grammar, const Pattern& newRow, const SearchParams& p) : g(grammar), params(p) {
    for (std::size_t i = 0; i < newRow.size(); ++i) {
      auto idx = g.indexOf(newRow.symbols()[i].text());
      newSymbols.push_back(idx ? *idx : kForeign + static_cast<std::uint32_t>(i));
    }
    roles.resize(g.size());
    idGain.resize(g.size());
    for (std::size_t o = 0; o < g.size(); ++o) {
      const auto& info = g.identifierInfo(o);
      roles[o].assign(g.patterns()[o].size(), Role::None);
      idGain[o].assign(g.patterns()[o].size(), 0);
      if (!info.citable()) continue;
      citable.push_back(o);
      const auto row = g.indexed(o);
      for (std::size_t k = 0; k < info.positions.size(); ++k) {
        const auto pos = info.positions[k];
        roles[o][pos] = k == 0 ? Role::Head : k < info.contextual.size() ? Role::Contextual : Role::Standalone;
        idGain[o][pos] = g.fixedCostAt(row[pos]);
        if (k >= info.contextual.size()) idGain[o][info.positions.front()] += g.fixedCostAt(row[pos]);
      }
    }
  }

  std::uint32_t symbolOf(const std::vector<std::size_t>& rowOrdinals, const Cell& c) const {
    if (c.row == 0) return newSymbols[c.index];
    return g.indexed(rowOrdinals[c.row - 1])[c.index];
  }
};

// Elements of an alignment (columns plus unaligned occurrences) with the
// per-row successor edges that any valid column order must respect.
struct ElementGraph {
  std::vector<FlatElement> elements;  // in early placement order, a topological order
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::size_t> order;  // layout as element indices
};

ElementGraph elementGraph(const Alignment& a, const Grammar& g) {
  ElementGraph eg;
  eg.elements = flatten(a, g, Placement::Early);
  std::vector<std::vector<std::size_t>> at(a.rowCount());
  for (std::size_t r = 0; r < a.rowCount(); ++r) at[r].assign(a.rowSymbols(r, g).size(), 0);
  for (std::size_t k = 0; k < eg.elements.size(); ++k) {
    const auto& e = eg.elements[k];
    if (e.isColumn) {
      for (const auto& c : a.columns()[e.column].cells) at[c.row][c.index] = k;
    } else {
      at[e.cell.row][e.cell.index] = k;
    }
  }
  eg.succ.resize(eg.elements.size());
  for (const auto& row : at) {
    for (std::size_t i = 0; i + 1 < row.size(); ++i) eg.succ[row[i]].push_back(row[i + 1]);
  }
  return eg;
}

std::vector<std::size_t> layoutOrder(const std::vector<FlatElement>& layout, const ElementGraph& eg,
                                     const Alignment& a) {
  // map a flattened layout back onto element indices
  std::vector<std::size_t> byColumn(a.columns().size());
  std::vector<std::pair<Cell, std::size_t>> singles;
  for (std::size_t k = 0; k < eg.elements.size(); ++k) {
    const auto& e = eg.elements[k];
    if (e.isColumn) {
      byColumn[e.column] = k;
    } else {
      singles.emplace_back(e.cell, k);
    }
  }
  std::sort(singles.begin(), singles.end());
  std::vector<std::size_t> order;
  order.reserve(layout.size());
  for (const auto& e : layout) {
    if (e.isColumn) {
      order.push_back(byColumn[e.column]);
    } else {
      auto it = std::lower_bound(singles.begin(), singles.end(), std::pair(e.cell, std::size_t{0}));
      order.push_back(it->second);
    }
  }
  return order;
}

// Topological order that pulls forward whatever leads to an early match in
// `target`: an element's priority is the first target position matching it
// or any of its descendants.
std::vector<std::size_t> guidedOrder(const ElementGraph& eg, const std::vector<std::uint32_t>& syms,
                                     std::span<const SymbolIndex> target) {
  const std::size_t n = eg.elements.size();
  const std::size_t none = target.size();
  std::vector<std::size_t> prio(n, none);
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (target[j] == syms[k]) {
        prio[k] = j;
        break;
      }
    }
    for (auto s : eg.succ[k]) prio[k] = std::min(prio[k], prio[s]);
  }
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& ss : eg.succ) {
    for (auto s : ss) ++indegree[s];
  }
  std::set<std::pair<std::size_t, std::size_t>> ready;
  for (std::size_t k = 0; k < n; ++k) {
    if (indegree[k] == 0) ready.emplace(prio[k], k);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t k = ready.begin()->second;
    ready.erase(ready.begin());
    order.push_back(k);
    for (auto s : eg.succ[k]) {
      if (--indegree[s] == 0) ready.emplace(prio[s], s);
    }
  }
  return order;
}

Alignment applyChain(const Alignment& parent, const ElementGraph& eg, const std::vector<std::size_t>& order,
                     PatternId pattern, const Chain& chain) {
  const std::size_t newRow = parent.rowCount();
  std::vector<Column> cols;
  cols.reserve(parent.columns().size() + chain.pairs.size());
  std::size_t p = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool paired = p < chain.pairs.size() && chain.pairs[p].query == k;
    const auto& e = eg.elements[order[k]];
    if (e.isColumn) {
      Column c = parent.columns()[e.column];
      if (paired) c.cells.push_back(Cell{newRow, chain.pairs[p].target});
      cols.push_back(std::move(c));
    } else if (paired) {
      cols.push_back(Column{{e.cell, Cell{newRow, chain.pairs[p].target}}});
    }
    if (paired) ++p;
  }
  auto rows = parent.oldRows();
  rows.push_back(pattern);
  return Alignment(parent.newRow(), std::move(rows), std::move(cols));
}

// Appends every not-yet-seen child of `parent` to `out`. When `only` is set,
// only that ordinal is tried.
void expand(const SearchContext& ctx, const Scored& parent, std::unordered_set<std::string>& seen,
            std::vector<Scored>& out, std::optional<std::size_t> only = std::nullopt) {
  const auto& g = ctx.g;
  const Alignment& a = parent.alignment;
  std::vector<std::size_t> rowOrdinals;
  std::vector<std::uint8_t> used(g.size(), 0);
  for (auto id : a.oldRows()) {
    rowOrdinals.push_back(g.ordinalOf(id));
    used[rowOrdinals.back()] = 1;
  }

  const ElementGraph eg = elementGraph(a, g);
  const std::size_t n = eg.elements.size();

  std::vector<std::vector<std::uint8_t>> matched(a.rowCount());
  for (std::size_t r = 0; r < a.rowCount(); ++r) matched[r].assign(a.rowSymbols(r, g).size(), 0);
  for (const auto& col : a.columns()) {
    for (const auto& c : col.cells) matched[c.row][c.index] = 1;
  }

  // Additive estimate of what pairing each unaligned occurrence saves; the
  // child is rescored exactly.
  std::vector<std::uint32_t> syms(n);
  std::vector<FixedBits> singletonGain(n, 0);
  std::vector<std::uint8_t> present(g.symbolCount(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = eg.elements[k];
    const Cell& c = e.isColumn ? a.columns()[e.column].cells.front() : e.cell;
    syms[k] = ctx.symbolOf(rowOrdinals, c);
    if (syms[k] < kForeign) present[syms[k]] = 1;
    if (e.isColumn) continue;
    if (c.row == 0) {
      if (syms[k] < kForeign) singletonGain[k] = g.fixedCostAt(syms[k]);
      continue;
    }
    const std::size_t o = rowOrdinals[c.row - 1];
    const auto& info = g.identifierInfo(o);
    const auto row = g.indexed(o);
    const bool headMatched = matched[c.row][info.positions.front()] != 0;
    switch (ctx.roles[o][c.index]) {
      case SearchContext::Role::Head:
        singletonGain[k] = g.fixedCostAt(syms[k]);
        for (std::size_t q = info.contextual.size(); q < info.positions.size(); ++q) {
          if (!matched[c.row][info.positions[q]]) singletonGain[k] += g.fixedCostAt(row[info.positions[q]]);
        }
        break;
      case SearchContext::Role::Contextual:
        singletonGain[k] = g.fixedCostAt(syms[k]);
        break;
      case SearchContext::Role::Standalone:
        singletonGain[k] = headMatched ? 0 : g.fixedCostAt(syms[k]);
        break;
      case SearchContext::Role::None:
        break;
    }
  }

  std::vector<std::vector<std::size_t>> fixedOrders;
  fixedOrders.push_back(layoutOrder(eg.elements, eg, a));
  auto late = layoutOrder(flatten(a, g, Placement::Late), eg, a);
  if (late != fixedOrders.front()) fixedOrders.push_back(std::move(late));

  for (std::size_t o : ctx.citable) {
    if (used[o] || (only && *only != o)) continue;
    const auto target = g.indexed(o);
    if (std::none_of(target.begin(), target.end(), [&](SymbolIndex s) { return present[s] != 0; })) continue;

    auto orders = fixedOrders;
    auto guided = guidedOrder(eg, syms, target);
    if (std::find(orders.begin(), orders.end(), guided) == orders.end()) orders.push_back(std::move(guided));

    const auto& idGain = ctx.idGain[o];
    for (const auto& order : orders) {
      std::vector<std::uint32_t> query(n);
      for (std::size_t k = 0; k < n; ++k) query[k] = syms[order[k]];
      PairWeight weight = [&](std::size_t k, std::size_t j) -> std::optional<FixedBits> {
        return singletonGain[order[k]] + idGain[j] + 1;  // one fixed-point unit favours fuller unification
      };
      auto chains = rankedChains(query, target, weight, std::max<std::size_t>(ctx.params.limits.maxFragments, 1),
                                 ctx.params.limits.exactThreshold);
      for (const auto& chain : chains) {
        Alignment child = applyChain(a, eg, order, g.patterns()[o].id(), chain);
        const FixedBits score = fixedScoreUnchecked(child, g);
        Scored s = makeScored(std::move(child), score);
        if (seen.insert(s.key).second) out.push_back(std::move(s));
      }
    }
  }
}

// True when `b` is `a` with some of its unifications undone at no change in
// score, which makes it a redundant entry.
bool subsumedBy(const Scored& b, const Scored& a) {
  return a.score == b.score && a.rowIds == b.rowIds && a.columns.size() > b.columns.size() &&
         std::includes(a.columns.begin(), a.columns.end(), b.columns.begin(), b.columns.end());
}

void keepBest(std::vector<Scored>& v, std::size_t width) {
  std::sort(v.begin(), v.end(), scoredLess);
  std::vector<Scored> kept;
  kept.reserve(std::min(width, v.size()));
  for (auto& s : v) {
    if (kept.size() == width) break;
    if (std::any_of(kept.begin(), kept.end(), [&](const Scored& k) { return subsumedBy(s, k); })) continue;
    kept.push_back(std::move(s));
  }
  v = std::move(kept);
}

std::vector<Alignment> finish(std::vector<Scored> v, const Grammar& g) {
  std::vector<Alignment> out;
  out.reserve(v.size());
  for (auto& s : v) {
    s.alignment.setScore(doubleScoreUnchecked(s.alignment, g));
    out.push_back(std::move(s.alignment));
  }
  return out;
}

}  // namespace

double scoreAlignment(const Alignment& a, const Grammar& g) {
  requireValid(a, g);
  return doubleScoreUnchecked(a, g);
}

FixedBits fixedScore(const Alignment& a, const Grammar& g) {
  requireValid(a, g);
  return fixedScoreUnchecked(a, g);
}

bool rankBefore(const Alignment& a, const Alignment& b, const Grammar& g) {
  return scoredLess(makeScored(a, fixedScore(a, g)), makeScored(b, fixedScore(b, g)));
}

std::vector<Alignment> buildAlignments(const Pattern& newPattern, const Grammar& g, const SearchParams& params) {
  if (newPattern.kind() != PatternKind::New) throw InvalidAlignmentError("buildAlignments requires a New pattern");
  const std::size_t width = std::max<std::size_t>(params.beamWidth, 1);
  SearchContext ctx(g, newPattern, params);

  std::unordered_set<std::string> seen;
  std::vector<Scored> beam;
  beam.push_back(makeScored(Alignment(newPattern), 0));
  seen.insert(beam.front().key);
  std::vector<Scored> covering;
  if (beam.front().alignment.coversNew()) covering.push_back(beam.front());

  const std::size_t iterations = std::max<std::size_t>(params.maxIterations, 1);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<Scored> children;
    for (const auto& parent : beam) expand(ctx, parent, seen, children);
    if (children.empty()) break;

    if (params.allOrNothing) {
      for (const auto& c : children) {
        if (c.alignment.coversNew()) covering.push_back(c);
      }
      keepBest(covering, width);
    }

    const auto before = beam.front().key;
    const auto beforeSize = beam.size();
    std::vector<std::string> beforeKeys;
    for (const auto& b : beam) beforeKeys.push_back(b.key);

    for (auto& c : children) beam.push_back(std::move(c));
    keepBest(beam, width);

    bool changed = beam.size() != beforeSize;
    for (std::size_t i = 0; !changed && i < beam.size(); ++i) changed = beam[i].key != beforeKeys[i];
    if (!changed) break;
  }

  return finish(params.allOrNothing ? std::move(covering) : std::move(beam), g);
}

std::vector<Alignment> extendAlignment(const Alignment& a, PatternId pattern, const Grammar& g,
                                       const SearchParams& params) {
  requireValid(a, g);
  SearchContext ctx(g, a.newRow(), params);
  const std::size_t ordinal = g.ordinalOf(pattern);
  std::unordered_set<std::string> seen;
  Scored parent = makeScored(a, fixedScoreUnchecked(a, g));
  seen.insert(parent.key);
  std::vector<Scored> children;
  expand(ctx, parent, seen, children, ordinal);
  std::sort(children.begin(), children.end(), scoredLess);
  return finish(std::move(children), g);
}

}  // namespace sp
