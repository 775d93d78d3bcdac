#include "sp/alignment.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace sp {

bool Column::contains(std::size_t row) const { return indexIn(row) != static_cast<std::size_t>(-1); }

std::size_t Column::indexIn(std::size_t row) const {
  for (const auto& c : cells) {
    if (c.row == row) return c.index;
  }
  return static_cast<std::size_t>(-1);
}

const SymbolSeq& Alignment::rowSymbols(std::size_t row, const Grammar& g) const {
  if (row == 0) return newRow_.symbols();
  return g.pattern(oldRows_.at(row - 1)).symbols();
}

std::vector<PatternId> Alignment::sortedRowIds() const {
  auto ids = oldRows_;
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool Alignment::coversNew() const {
  std::size_t covered = 0;
  for (const auto& c : columns_) {
    if (c.contains(0)) ++covered;
  }
  return covered == newRow_.size();
}

ValidationReport validateAlignment(const Alignment& a, const Grammar& g) {
  ValidationReport report;
  if (a.newRow().kind() != PatternKind::New) report.errors.push_back("row 0 is not a New pattern");

  std::set<PatternId> seen;
  for (std::size_t r = 0; r < a.oldRows().size(); ++r) {
    const auto id = a.oldRows()[r];
    if (!g.find(id)) {
      report.errors.push_back(fmt::format("row {} cites unknown pattern {}", r + 1, id));
    } else if (!seen.insert(id).second) {
      report.warnings.push_back(fmt::format("pattern {} appears in more than one row", id));
    }
  }
  if (!report.ok()) return report;

  std::vector<long long> last(a.rowCount(), -1);
  for (std::size_t k = 0; k < a.columns().size(); ++k) {
    const auto& col = a.columns()[k];
    if (col.cells.size() < 2) {
      report.errors.push_back(fmt::format("column {} has fewer than two rows", k));
      continue;
    }
    const Symbol* value = nullptr;
    for (std::size_t i = 0; i < col.cells.size(); ++i) {
      const auto& cell = col.cells[i];
      if (i > 0 && col.cells[i - 1].row >= cell.row) {
        report.errors.push_back(fmt::format("column {} rows are not strictly increasing", k));
      }
      if (cell.row >= a.rowCount()) {
        report.errors.push_back(fmt::format("column {} refers to missing row {}", k, cell.row));
        continue;
      }
      const auto& syms = a.rowSymbols(cell.row, g);
      if (cell.index >= syms.size()) {
        report.errors.push_back(fmt::format("column {} index {} out of range for row {}", k, cell.index, cell.row));
        continue;
      }
      if (!value) {
        value = &syms[cell.index];
      } else if (!(*value == syms[cell.index])) {
        report.errors.push_back(fmt::format("column {} mixes symbols '{}' and '{}'", k, value->text(),
                                            syms[cell.index].text()));
      }
      if (static_cast<long long>(cell.index) <= last[cell.row]) {
        report.errors.push_back(fmt::format("row {} order violated at column {}", cell.row, k));
      }
      last[cell.row] = static_cast<long long>(cell.index);
    }
  }
  return report;
}

std::vector<FlatElement> flatten(const Alignment& a, const Grammar& g, Placement placement) {
  const std::size_t ncols = a.columns().size();
  const std::size_t nrows = a.rowCount();

  // assigned[row][index] = column position + 1, 0 when unaligned
  std::vector<std::vector<std::size_t>> assigned(nrows);
  for (std::size_t r = 0; r < nrows; ++r) assigned[r].assign(a.rowSymbols(r, g).size(), 0);
  for (std::size_t k = 0; k < ncols; ++k) {
    for (const auto& c : a.columns()[k].cells) assigned[c.row][c.index] = k + 1;
  }

  // slot s (0..ncols) holds singletons emitted before column s
  std::vector<std::vector<Cell>> slots(ncols + 1);
  for (std::size_t r = 0; r < nrows; ++r) {
    const auto& row = assigned[r];
    std::size_t prev = 0;  // column position + 1 of the previous aligned symbol
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i]) {
        prev = row[i];
        continue;
      }
      std::size_t slot = prev;
      if (placement == Placement::Late) {
        std::size_t next = ncols + 1;
        for (std::size_t j = i + 1; j < row.size(); ++j) {
          if (row[j]) {
            next = row[j];
            break;
          }
        }
        slot = next - 1;
      }
      slots[slot].push_back(Cell{r, i});
    }
  }

  std::vector<FlatElement> out;
  for (std::size_t s = 0; s <= ncols; ++s) {
    auto& bucket = slots[s];
    std::sort(bucket.begin(), bucket.end());
    for (const auto& c : bucket) out.push_back(FlatElement{false, 0, c});
    if (s < ncols) out.push_back(FlatElement{true, s, {}});
  }
  return out;
}

}  // namespace sp
