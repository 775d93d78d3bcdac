#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "sp/alignment.hpp"
#include "sp/grammar.hpp"

namespace sp {

inline constexpr const char* kRecordSchema = "%SPALIGN1";

/// Text layout in the style of a printed multiple alignment: one line per row
/// (row number at both ends), matched symbols stacked in a shared display
/// column and linked by `|` through the rows in between. When `width` > 0 the
/// display columns are wrapped into blocks no wider than `width`.
std::string renderAlignment(const Alignment& a, const Grammar& g, std::size_t width = 0);

/// Line-oriented dump of a ranked list. `probabilities` may be empty.
///
///   %SPALIGN1
///   alignment <rank> score=<bits> probability=<p> old_rows=<n>
///   row <r> <new|id> <symbols...>
///   col <ordinal> <symbol> <row>:<index> ...
///   end
void writeRecords(std::ostream& out, const std::vector<Alignment>& ranked, const std::vector<double>& probabilities,
                  const Grammar& g);

}  // namespace sp
