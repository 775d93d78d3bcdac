#include "sp/match.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace sp {

namespace {

bool chainLess(const Chain& a, const Chain& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  if (a.gaps != b.gaps) return a.gaps < b.gaps;
  return a.pairs < b.pairs;
}

// Lexicographic (weight desc, tail asc). `tail` is a potential whose
// ordering matches the gap count for a fixed starting pair.
struct Key {
  FixedBits weight = 0;
  long long tail = 0;
  std::uint32_t q = 0;
  std::uint32_t t = 0;
  bool valid = false;
};

bool keyBetter(const Key& a, const Key& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.tail < b.tail;
}

bool keyEqual(const Key& a, const Key& b) {
  return a.valid && b.valid && a.weight == b.weight && a.tail == b.tail;
}

// Keeps the better key; on equal keys keeps the lexicographically smaller start.
void absorb(Key& best, const Key& other) {
  if (keyBetter(other, best)) {
    best = other;
  } else if (keyEqual(other, best) && std::pair(other.q, other.t) < std::pair(best.q, best.t)) {
    best = other;
  }
}

std::vector<Chain> exactChains(std::span<const std::uint32_t> query, std::span<const std::uint32_t> target,
                               const PairWeight& weight, std::size_t maxChains) {
  const std::size_t n = query.size();
  const std::size_t m = target.size();
  const std::size_t stride = m + 1;
  std::vector<Key> suffix((n + 1) * stride);
  std::vector<Key> start(n * m);
  std::vector<std::uint8_t> linked(n * m, 0);

  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t jj = m; jj-- > 0;) {
      Key s;
      if (query[ii] == target[jj]) {
        if (auto w = weight(ii, jj)) {
          s.valid = true;
          s.q = static_cast<std::uint32_t>(ii);
          s.t = static_cast<std::uint32_t>(jj);
          s.weight = *w;
          s.tail = static_cast<long long>(ii + jj) - 2;
          const Key& next = suffix[(ii + 1) * stride + jj + 1];
          if (next.valid) {
            Key joined = s;
            joined.weight = *w + next.weight;
            joined.tail = next.tail - 2;
            if (keyBetter(joined, s)) {
              s = joined;
              linked[ii * m + jj] = 1;
            }
          }
        }
      }
      start[ii * m + jj] = s;
      Key best = s;
      absorb(best, suffix[(ii + 1) * stride + jj]);
      absorb(best, suffix[ii * stride + jj + 1]);
      suffix[ii * stride + jj] = best;
    }
  }

  struct Start {
    FixedBits weight;
    long long gaps;
    std::uint32_t q, t;
  };
  std::vector<Start> starts;
  for (std::size_t ii = 0; ii < n; ++ii) {
    for (std::size_t jj = 0; jj < m; ++jj) {
      const auto& s = start[ii * m + jj];
      if (!s.valid) continue;
      starts.push_back({s.weight, s.tail - static_cast<long long>(ii + jj) + 2, s.q, s.t});
    }
  }
  auto startLess = [](const Start& a, const Start& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.gaps != b.gaps) return a.gaps < b.gaps;
    return std::pair(a.q, a.t) < std::pair(b.q, b.t);
  };
  const std::size_t keep = std::min(maxChains, starts.size());
  std::partial_sort(starts.begin(), starts.begin() + static_cast<std::ptrdiff_t>(keep), starts.end(), startLess);

  std::vector<Chain> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    Chain c;
    c.weight = starts[k].weight;
    std::size_t ii = starts[k].q;
    std::size_t jj = starts[k].t;
    while (true) {
      c.pairs.push_back({ii, jj});
      if (!linked[ii * m + jj]) break;
      const Key& next = suffix[(ii + 1) * stride + jj + 1];
      ii = next.q;
      jj = next.t;
    }
    c.gaps = chainGaps(c.pairs);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Chain> heuristicChains(std::span<const std::uint32_t> query, std::span<const std::uint32_t> target,
                                   const PairWeight& weight, std::size_t maxChains) {
  constexpr std::size_t kMaxHitsPerQuery = 32;
  constexpr std::size_t kMaxRuns = 1024;
  const std::size_t m = target.size();

  std::unordered_map<std::uint32_t, std::vector<std::size_t>> where;
  for (std::size_t j = 0; j < m; ++j) where[target[j]].push_back(j);

  std::unordered_map<std::uint64_t, FixedBits> hits;
  auto keyOf = [m](std::size_t i, std::size_t j) { return static_cast<std::uint64_t>(i) * (m + 1) + j; };
  for (std::size_t i = 0; i < query.size(); ++i) {
    auto it = where.find(query[i]);
    if (it == where.end()) continue;
    const auto& pos = it->second;
    const std::size_t step = pos.size() > kMaxHitsPerQuery ? pos.size() / kMaxHitsPerQuery : 1;
    for (std::size_t k = 0; k < pos.size(); k += step) {
      if (auto w = weight(i, pos[k])) hits.emplace(keyOf(i, pos[k]), *w);
    }
  }

  struct Run {
    std::size_t q, t, len;
    FixedBits weight;
  };
  std::vector<Run> runs;
  for (const auto& [key, w] : hits) {
    const std::size_t i = key / (m + 1);
    const std::size_t j = key % (m + 1);
    if (i > 0 && j > 0 && hits.count(keyOf(i - 1, j - 1))) continue;
    Run r{i, j, 0, 0};
    for (auto h = hits.find(keyOf(i, j)); h != hits.end(); h = hits.find(keyOf(i + r.len, j + r.len))) {
      r.weight += h->second;
      ++r.len;
    }
    runs.push_back(r);
  }
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return std::pair(a.q, a.t) < std::pair(b.q, b.t);
  });
  if (runs.size() > kMaxRuns) runs.resize(kMaxRuns);
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return std::pair(a.q, a.t) < std::pair(b.q, b.t); });

  const std::size_t r = runs.size();
  std::vector<FixedBits> bestW(r);
  std::vector<long long> bestTail(r);  // gaps of the chain from this run, plus q + t of its start
  std::vector<std::size_t> next(r, r);
  for (std::size_t a = r; a-- > 0;) {
    const auto& ra = runs[a];
    bestW[a] = ra.weight;
    bestTail[a] = static_cast<long long>(ra.q + ra.t);
    long long bestGaps = 0;
    for (std::size_t b = a + 1; b < r; ++b) {
      const auto& rb = runs[b];
      if (rb.q < ra.q + ra.len || rb.t < ra.t + ra.len) continue;
      const FixedBits w = ra.weight + bestW[b];
      const long long gaps = bestTail[b] - static_cast<long long>(ra.q + ra.len + ra.t + ra.len);
      if (w > bestW[a] || (w == bestW[a] && next[a] != r && gaps < bestGaps)) {
        bestW[a] = w;
        bestGaps = gaps;
        next[a] = b;
      }
    }
    bestTail[a] = bestGaps + static_cast<long long>(ra.q + ra.t);
  }

  std::vector<Chain> out;
  out.reserve(r);
  for (std::size_t a = 0; a < r; ++a) {
    Chain c;
    c.weight = bestW[a];
    for (std::size_t k = a; k != r; k = next[k]) {
      for (std::size_t d = 0; d < runs[k].len; ++d) c.pairs.push_back({runs[k].q + d, runs[k].t + d});
    }
    c.gaps = chainGaps(c.pairs);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), chainLess);
  if (out.size() > maxChains) out.resize(maxChains);
  return out;
}

}  // namespace

std::size_t chainGaps(std::span<const MatchPair> pairs) {
  if (pairs.size() < 2) return 0;
  const auto& f = pairs.front();
  const auto& l = pairs.back();
  return (l.query - f.query) + (l.target - f.target) - 2 * (pairs.size() - 1);
}

std::vector<Chain> rankedChains(std::span<const std::uint32_t> query, std::span<const std::uint32_t> target,
                                const PairWeight& weight, std::size_t maxChains, std::size_t exactThreshold) {
  if (query.empty() || target.empty() || maxChains == 0) return {};
  if (query.size() * target.size() <= exactThreshold) return exactChains(query, target, weight, maxChains);
  return heuristicChains(query, target, weight, maxChains);
}

std::vector<MatchFragment> findMatches(std::span<const Symbol> query, std::span<const Symbol> target,
                                       const Grammar& g, const SearchLimits& limits) {
  std::unordered_map<std::string, std::uint32_t> local;
  std::vector<double> cost;
  auto intern = [&](const Symbol& s) {
    auto [it, inserted] = local.try_emplace(s.text(), static_cast<std::uint32_t>(cost.size()));
    if (inserted) cost.push_back(g.literalCost(s));
    return it->second;
  };
  std::vector<std::uint32_t> q, t;
  q.reserve(query.size());
  t.reserve(target.size());
  for (const auto& s : query) q.push_back(intern(s));
  for (const auto& s : target) t.push_back(intern(s));

  std::vector<FixedBits> fixed(cost.size());
  std::transform(cost.begin(), cost.end(), fixed.begin(), toFixed);
  PairWeight w = [&](std::size_t i, std::size_t) -> std::optional<FixedBits> { return fixed[q[i]]; };

  auto chains = rankedChains(q, t, w, std::max<std::size_t>(limits.maxFragments, 1), limits.exactThreshold);
  std::vector<MatchFragment> out;
  out.reserve(chains.size());
  for (auto& c : chains) {
    MatchFragment f;
    f.gapCount = c.gaps;
    for (const auto& p : c.pairs) f.weight += cost[q[p.query]];
    f.pairs = std::move(c.pairs);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<PatternHit> matchAllOld(std::span<const Symbol> query, const Grammar& g, const SearchLimits& limits) {
  std::vector<PatternHit> out;
  if (query.empty()) return out;
  for (const auto& p : g.patterns()) {
    for (auto& f : findMatches(query, p.symbols(), g, limits)) out.push_back({p.id(), std::move(f)});
  }
  std::stable_sort(out.begin(), out.end(), [](const PatternHit& a, const PatternHit& b) {
    if (a.fragment.weight != b.fragment.weight) return a.fragment.weight > b.fragment.weight;
    if (a.fragment.gapCount != b.fragment.gapCount) return a.fragment.gapCount < b.fragment.gapCount;
    if (a.pattern != b.pattern) return a.pattern < b.pattern;
    return a.fragment.pairs < b.fragment.pairs;
  });
  return out;
}

}  // namespace sp
