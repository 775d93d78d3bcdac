#include "sp/render.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

namespace sp {

namespace {

struct DisplayColumn {
  std::vector<std::string> cells;  // per row, empty when not occupied
  std::size_t low = 0;             // rows linked by `|` span [low, high]
  std::size_t high = 0;
  std::size_t width = 1;
};

std::vector<DisplayColumn> layout(const Alignment& a, const Grammar& g) {
  const std::size_t rows = a.rowCount();
  std::vector<DisplayColumn> out;
  for (const auto& e : flatten(a, g, Placement::Early)) {
    DisplayColumn d;
    d.cells.assign(rows, {});
    if (e.isColumn) {
      const auto& col = a.columns()[e.column];
      for (const auto& c : col.cells) d.cells[c.row] = a.rowSymbols(c.row, g)[c.index].text();
      d.low = col.cells.front().row;
      d.high = col.cells.back().row;
    } else {
      d.cells[e.cell.row] = a.rowSymbols(e.cell.row, g)[e.cell.index].text();
      d.low = d.high = e.cell.row;
    }
    for (const auto& s : d.cells) d.width = std::max(d.width, s.size());
    out.push_back(std::move(d));
  }
  return out;
}

std::string trimRight(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

void renderBlock(std::string& out, const std::vector<DisplayColumn>& cols, std::size_t begin, std::size_t end,
                 std::size_t rows) {
  const std::size_t label = fmt::formatted_size("{}", rows - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    std::string line = fmt::format("{:<{}}", r, label);
    for (std::size_t k = begin; k < end; ++k) {
      const auto& d = cols[k];
      std::string cell = d.cells[r];
      if (cell.empty() && d.low < r && r < d.high) cell = "|";
      line += ' ';
      line += fmt::format("{:<{}}", cell, d.width);
    }
    out += fmt::format("{} {}\n", line, r);

    if (r + 1 == rows) break;
    std::string link(label, ' ');
    for (std::size_t k = begin; k < end; ++k) {
      const auto& d = cols[k];
      link += ' ';
      link += fmt::format("{:<{}}", (d.low <= r && r < d.high) ? "|" : "", d.width);
    }
    out += trimRight(std::move(link));
    out += '\n';
  }
}

}  // namespace

std::string renderAlignment(const Alignment& a, const Grammar& g, std::size_t width) {
  const auto cols = layout(a, g);
  const std::size_t rows = a.rowCount();
  const std::size_t margin = 2 * fmt::formatted_size("{}", rows - 1) + 2;
  std::string out;
  std::size_t begin = 0;
  do {
    std::size_t end = begin;
    std::size_t used = margin;
    while (end < cols.size() && (width == 0 || end == begin || used + cols[end].width + 1 <= width)) {
      used += cols[end].width + 1;
      ++end;
    }
    if (begin > 0) out += '\n';
    renderBlock(out, cols, begin, end, rows);
    begin = end;
  } while (begin < cols.size());
  return out;
}

void writeRecords(std::ostream& out, const std::vector<Alignment>& ranked, const std::vector<double>& probabilities,
                  const Grammar& g) {
  out << kRecordSchema << '\n';
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& a = ranked[k];
    const double p = k < probabilities.size() ? probabilities[k] : 0.0;
    out << fmt::format("alignment {} score={:.9f} probability={:.9f} old_rows={}\n", k + 1, a.score(), p, a.oldRows().size());
    out << fmt::format("row 0 new {}\n", joinSymbols(a.newRow().symbols()));
    for (std::size_t r = 1; r < a.rowCount(); ++r) {
      out << fmt::format("row {} {} {}\n", r, a.oldRows()[r - 1], joinSymbols(a.rowSymbols(r, g)));
    }
    for (std::size_t c = 0; c < a.columns().size(); ++c) {
      const auto& col = a.columns()[c];
      const auto& first = col.cells.front();
      std::string line = fmt::format("col {} {}", c, a.rowSymbols(first.row, g)[first.index].text());
      for (const auto& cell : col.cells) line += fmt::format(" {}:{}", cell.row, cell.index);
      out << line << '\n';
    }
    out << "end\n";
  }
}

}  // namespace sp
