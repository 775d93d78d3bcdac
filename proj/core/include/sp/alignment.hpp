#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "sp/grammar.hpp"
#include "sp/pattern.hpp"

namespace sp {

/// One symbol occurrence: row 0 is the New pattern, row r >= 1 is oldRows[r-1].
struct Cell {
  std::size_t row = 0;
  std::size_t index = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Symbol occurrences unified into one column; cells are kept sorted by row
/// and there are always at least two of them.
struct Column {
  std::vector<Cell> cells;

  bool contains(std::size_t row) const;
  /// Index of `row`'s occurrence in this column, or npos.
  std::size_t indexIn(std::size_t row) const;

  friend bool operator==(const Column&, const Column&) = default;
};

class Alignment {
 public:
  Alignment() : newRow_(Pattern::makeNew({})) {}
  explicit Alignment(Pattern newRow) : newRow_(std::move(newRow)) {}
  Alignment(Pattern newRow, std::vector<PatternId> oldRows, std::vector<Column> columns, double score = 0.0)
      : newRow_(std::move(newRow)), oldRows_(std::move(oldRows)), columns_(std::move(columns)), score_(score) {}

  const Pattern& newRow() const noexcept { return newRow_; }
  const std::vector<PatternId>& oldRows() const noexcept { return oldRows_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  double score() const noexcept { return score_; }
  void setScore(double s) noexcept { score_ = s; }

  std::size_t rowCount() const noexcept { return oldRows_.size() + 1; }
  /// Symbols of row `row` (0 = New).
  const SymbolSeq& rowSymbols(std::size_t row, const Grammar& g) const;

  /// Sorted pattern ids of the Old rows.
  std::vector<PatternId> sortedRowIds() const;

  /// True when every New symbol sits in some column.
  bool coversNew() const;

 private:
  Pattern newRow_;
  std::vector<PatternId> oldRows_;
  std::vector<Column> columns_;
  double score_ = 0.0;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

/// Checks the column invariants: one symbol value per column, strictly
/// increasing indices per row across column order, each occurrence used at
/// most once, at least two rows per column, and Old rows known to `g`.
/// A pattern used in more than one row is accepted with a warning.
ValidationReport validateAlignment(const Alignment& a, const Grammar& g);

/// Element of a flattened alignment: either a column or a single unaligned
/// symbol occurrence.
struct FlatElement {
  bool isColumn = false;
  std::size_t column = 0;  // when isColumn
  Cell cell;               // when !isColumn
};

/// Where unaligned symbols go between a row's neighbouring columns.
enum class Placement {
  Early,  // right after the row's previous column
  Late,   // right before the row's next column
};

/// Linearises an alignment: columns in column order, each emitted once;
/// unaligned symbols inserted between their row's neighbouring columns,
/// ordered by (row, index) within a slot.
std::vector<FlatElement> flatten(const Alignment& a, const Grammar& g, Placement placement = Placement::Early);

}  // namespace sp
