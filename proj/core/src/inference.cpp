#include "sp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sp/builder.hpp"

namespace sp {

std::vector<double> normalizeScores(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("no candidates to normalise");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp2(scores[i] - top);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

ScoredCandidateSet alignmentProbabilities(std::vector<Alignment> candidates, const Grammar& g) {
  if (candidates.empty()) throw std::invalid_argument("alignmentProbabilities needs at least one candidate");
  ScoredCandidateSet set;
  set.scores.reserve(candidates.size());
  for (auto& a : candidates) {
    a.setScore(scoreAlignment(a, g));
    set.scores.push_back(a.score());
  }
  set.probabilities = normalizeScores(set.scores);
  set.candidates = std::move(candidates);
  return set;
}

std::vector<InferredSymbol> inferredSymbols(const Alignment& a, const Grammar& g) {
  std::vector<InferredSymbol> out;
  for (const auto& e : flatten(a, g, Placement::Early)) {
    if (e.isColumn) {
      const auto& col = a.columns()[e.column];
      if (col.contains(0)) continue;
      for (const auto& c : col.cells) out.push_back({c.row, a.rowSymbols(c.row, g)[c.index]});
    } else if (e.cell.row != 0) {
      out.push_back({e.cell.row, a.rowSymbols(e.cell.row, g)[e.cell.index]});
    }
  }
  return out;
}

}  // namespace sp
