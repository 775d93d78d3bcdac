#include "sp/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "sp/match.hpp"

namespace sp {

namespace {

constexpr double kHeaderBits = 8.0;
constexpr std::size_t kUsageRounds = 3;
constexpr double kImprovement = 1e-9;

using Seq = std::vector<std::uint32_t>;

struct Corpus {
  std::vector<std::string> names;
  std::vector<double> novel;
  std::vector<Seq> items;
};

Corpus intern(const std::vector<Pattern>& patterns) {
  Corpus c;
  std::unordered_map<std::string, std::uint32_t> ids;
  for (const auto& p : patterns) {
    Seq seq;
    seq.reserve(p.size());
    for (const auto& s : p.symbols()) {
      auto [it, inserted] = ids.try_emplace(s.text(), static_cast<std::uint32_t>(c.names.size()));
      if (inserted) {
        c.names.push_back(s.text());
        c.novel.push_back(novelSymbolCost(s.text()));
      }
      seq.push_back(it->second);
    }
    c.items.push_back(std::move(seq));
  }
  return c;
}

// Prefix trie over candidate bodies.
class Trie {
 public:
  explicit Trie(const std::vector<Seq>& bodies) : terminal_(1, kNone) {
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      std::uint32_t node = 0;
      for (auto s : bodies[b]) {
        auto [it, inserted] = edges_.try_emplace(key(node, s), static_cast<std::uint32_t>(terminal_.size()));
        if (inserted) terminal_.push_back(kNone);
        node = it->second;
      }
      terminal_[node] = b;
    }
  }

  /// Calls f(body) for every body that occurs in `seq` starting at `pos`.
  template <typename F>
  void scan(const Seq& seq, std::size_t pos, std::size_t end, F&& f) const {
    std::uint32_t node = 0;
    for (std::size_t i = pos; i < end; ++i) {
      auto it = edges_.find(key(node, seq[i]));
      if (it == edges_.end()) return;
      node = it->second;
      if (terminal_[node] != kNone) f(terminal_[node]);
    }
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  static std::uint64_t key(std::uint32_t node, std::uint32_t s) { return (static_cast<std::uint64_t>(node) << 32) | s; }

  std::unordered_map<std::uint64_t, std::uint32_t> edges_;
  std::vector<std::size_t> terminal_;
};

// One unit of a segmented item: a pattern reference or a literal.
struct Unit {
  std::size_t begin = 0;
  std::size_t length = 1;
  long pattern = -1;  // index into the evaluated set, -1 for a literal
};

struct Evaluation {
  double grammarBits = 0.0;
  double encodingBits = 0.0;
  std::vector<std::uint64_t> frequency;
  std::vector<std::vector<Unit>> units;

  double total() const { return grammarBits + encodingBits; }
};

// Cost model mirroring Grammar/bitSize for a grammar made of learned
// patterns `%gK body #%gK`.
class Model {
 public:
  explicit Model(const Corpus& c) : c_(c) {}

  Evaluation evaluate(const std::vector<const Seq*>& bodies, bool keepUnits) const {
    const std::size_t n = bodies.size();
    std::unordered_map<std::uint32_t, std::vector<std::size_t>> byFirst;
    for (std::size_t p = 0; p < n; ++p) byFirst[bodies[p]->front()].push_back(p);

    Evaluation ev;
    ev.frequency.assign(n, 1);
    std::vector<std::size_t> usage(n, 0);
    for (std::size_t round = 0; round <= kUsageRounds; ++round) {
      const bool last = round == kUsageRounds;
      setCosts(bodies, ev.frequency);
      std::fill(usage.begin(), usage.end(), 0);
      ev.encodingBits = 0.0;
      if (last && keepUnits) ev.units.assign(c_.items.size(), {});
      for (std::size_t it = 0; it < c_.items.size(); ++it) {
        ev.encodingBits += segment(c_.items[it], bodies, byFirst, usage, last && keepUnits ? &ev.units[it] : nullptr);
      }
      if (last) break;
      for (std::size_t p = 0; p < n; ++p) ev.frequency[p] = std::max<std::size_t>(usage[p], 1);
    }

    for (std::size_t p = 0; p < n; ++p) {
      double bits = 3.0 * refBits_[p] + kHeaderBits;
      for (auto s : *bodies[p]) bits += cost_[s];
      ev.grammarBits += bits;
    }
    return ev;
  }

 private:
  void setCosts(const std::vector<const Seq*>& bodies, const std::vector<std::uint64_t>& freq) const {
    std::uint64_t total = 0;
    weight_.assign(c_.names.size(), 0);
    for (std::size_t p = 0; p < bodies.size(); ++p) {
      total += freq[p] * (bodies[p]->size() + 2);
      for (auto s : *bodies[p]) weight_[s] += freq[p];
    }
    cost_.assign(c_.names.size(), 0.0);
    literal_.assign(c_.names.size(), 0.0);
    for (std::size_t s = 0; s < c_.names.size(); ++s) {
      cost_[s] = weight_[s] ? std::log2(static_cast<double>(total) / static_cast<double>(weight_[s])) : 0.0;
      literal_[s] = (weight_[s] ? cost_[s] : c_.novel[s]) + kItemFlagBits;
    }
    refBits_.assign(bodies.size(), 0.0);
    for (std::size_t p = 0; p < bodies.size(); ++p) {
      refBits_[p] = std::log2(static_cast<double>(total) / static_cast<double>(freq[p]));
    }
  }

  double segment(const Seq& item, const std::vector<const Seq*>& bodies,
                 const std::unordered_map<std::uint32_t, std::vector<std::size_t>>& byFirst,
                 std::vector<std::size_t>& usage, std::vector<Unit>* units) const {
    const std::size_t n = item.size();
    best_.assign(n + 1, 0.0);
    choice_.assign(n, -1);
    for (std::size_t i = n; i-- > 0;) {
      best_[i] = best_[i + 1] + literal_[item[i]];
      auto it = byFirst.find(item[i]);
      if (it == byFirst.end()) continue;
      for (std::size_t p : it->second) {
        const Seq& b = *bodies[p];
        if (i + b.size() > n || !std::equal(b.begin(), b.end(), item.begin() + static_cast<std::ptrdiff_t>(i))) continue;
        const double c = refBits_[p] + kItemFlagBits + best_[i + b.size()];
        if (c < best_[i]) {
          best_[i] = c;
          choice_[i] = static_cast<long>(p);
        }
      }
    }
    for (std::size_t i = 0; i < n;) {
      if (choice_[i] < 0) {
        if (units) units->push_back({i, 1, -1});
        ++i;
      } else {
        const auto p = static_cast<std::size_t>(choice_[i]);
        ++usage[p];
        if (units) units->push_back({i, bodies[p]->size(), choice_[i]});
        i += bodies[p]->size();
      }
    }
    return best_[0];
  }

  const Corpus& c_;
  mutable std::vector<std::uint64_t> weight_;
  mutable std::vector<double> cost_;
  mutable std::vector<double> literal_;
  mutable std::vector<double> refBits_;
  mutable std::vector<double> best_;
  mutable std::vector<long> choice_;
};

struct PoolEntry {
  CandidateOrigin origin;
  std::size_t support = 0;
};

class CandidatePool {
 public:
  /// Returns true when `body` was not already present.
  bool add(Seq body, CandidateOrigin origin) {
    if (body.size() < 2) return false;
    return entries_.try_emplace(std::move(body), PoolEntry{origin, 0}).second;
  }

  std::size_t size() const { return entries_.size(); }

  // Flattened views, rebuilt after each round of additions.
  void refresh(const Corpus& c) {
    bodies_.clear();
    info_.clear();
    for (auto& [body, entry] : entries_) {
      bodies_.push_back(body);
      info_.push_back(&entry);
    }
    trie_ = std::make_unique<Trie>(bodies_);
    std::vector<std::size_t> count(bodies_.size(), 0);
    for (const auto& item : c.items) {
      for (std::size_t i = 0; i < item.size(); ++i) trie_->scan(item, i, item.size(), [&](std::size_t b) { ++count[b]; });
    }
    for (std::size_t b = 0; b < bodies_.size(); ++b) info_[b]->support = count[b];
  }

  const std::vector<Seq>& bodies() const { return bodies_; }
  const PoolEntry& info(std::size_t b) const { return *info_[b]; }
  const Trie& trie() const { return *trie_; }
  std::size_t indexOf(const Seq& body) const {
    return static_cast<std::size_t>(std::lower_bound(bodies_.begin(), bodies_.end(), body) - bodies_.begin());
  }

 private:
  std::map<Seq, PoolEntry> entries_;
  std::vector<Seq> bodies_;
  std::vector<PoolEntry*> info_;
  std::unique_ptr<Trie> trie_;
};

// Unifies two sequences and records the shared runs and the unshared stretches.
void unifyPair(const Seq& a, const Seq& b, const Corpus& c, CandidatePool& pool) {
  PairWeight w = [&](std::size_t q, std::size_t) -> std::optional<FixedBits> { return toFixed(c.novel[a[q]]); };
  auto chains = rankedChains(a, b, w, 1, SearchLimits{}.exactThreshold);
  if (chains.empty()) return;
  const auto& pairs = chains.front().pairs;

  for (std::size_t k = 0; k < pairs.size();) {
    std::size_t e = k + 1;
    while (e < pairs.size() && pairs[e].query == pairs[e - 1].query + 1 && pairs[e].target == pairs[e - 1].target + 1) ++e;
    pool.add(Seq(a.begin() + static_cast<std::ptrdiff_t>(pairs[k].query),
                 a.begin() + static_cast<std::ptrdiff_t>(pairs[e - 1].query + 1)),
             CandidateOrigin::UnifiedMatch);
    k = e;
  }

  auto residues = [&](const Seq& s, bool query) {
    std::size_t prev = 0;
    auto emit = [&](std::size_t from, std::size_t to) {
      if (to > from) {
        pool.add(Seq(s.begin() + static_cast<std::ptrdiff_t>(from), s.begin() + static_cast<std::ptrdiff_t>(to)),
                 CandidateOrigin::Residue);
      }
    };
    for (const auto& p : pairs) {
      const std::size_t at = query ? p.query : p.target;
      emit(prev, at);
      prev = at + 1;
    }
    emit(prev, s.size());
  };
  residues(a, true);
  residues(b, false);
}

void unifyAll(const std::vector<Seq>& seqs, const Corpus& c, const LearnParams& params, std::mt19937_64& rng,
              CandidatePool& pool) {
  const std::size_t m = seqs.size();
  if (m < 2) return;
  const std::uint64_t pairs = static_cast<std::uint64_t>(m) * (m - 1) / 2;
  if (pairs <= params.pairSample) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) unifyPair(seqs[i], seqs[j], c, pool);
    }
    return;
  }
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::set<std::pair<std::size_t, std::size_t>> done;
  while (done.size() < params.pairSample) {
    std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (done.emplace(i, j).second) unifyPair(seqs[i], seqs[j], c, pool);
  }
}

std::string freshPrefix(const Corpus& c) {
  std::string prefix = "%g";
  auto clashes = [&](const std::string& p) {
    return std::any_of(c.names.begin(), c.names.end(), [&](const std::string& s) {
      return s.rfind(p, 0) == 0 || s.rfind("#" + p, 0) == 0;
    });
  };
  while (clashes(prefix)) prefix += '_';
  return prefix;
}

class Selector {
 public:
  Selector(const Corpus& c, const Model& model, const CandidatePool& pool, const LearnParams& params)
      : c_(c), model_(model), pool_(pool), params_(params) {}

  const std::vector<Seq>& selected() const { return selected_; }
  const Evaluation& current() const { return current_; }

  void reset() { current_ = evalWith(selected_); }

  /// Greedy add/drop until no single change lowers the total.
  bool improve() {
    bool changed = false;
    while (true) {
      auto shortlist = shortlistCandidates();
      std::size_t bestIndex = shortlist.size();
      Evaluation best;
      for (std::size_t k = 0; k < shortlist.size(); ++k) {
        auto trial = selected_;
        trial.push_back(pool_.bodies()[shortlist[k]]);
        std::sort(trial.begin(), trial.end());
        Evaluation ev = evalWith(trial);
        if (ev.total() < current_.total() - kImprovement &&
            (bestIndex == shortlist.size() || ev.total() < best.total() - kImprovement)) {
          bestIndex = k;
          best = std::move(ev);
        }
      }
      if (bestIndex == shortlist.size()) break;
      selected_.push_back(pool_.bodies()[shortlist[bestIndex]]);
      std::sort(selected_.begin(), selected_.end());
      current_ = evalWith(selected_);
      changed = true;
      dropPass();
    }
    return changed;
  }

 private:
  Evaluation evalWith(const std::vector<Seq>& set) const {
    std::vector<const Seq*> ptrs;
    for (const auto& s : set) ptrs.push_back(&s);
    return model_.evaluate(ptrs, true);
  }

  void dropPass() {
    bool dropped = true;
    while (dropped && !selected_.empty()) {
      dropped = false;
      for (std::size_t k = 0; k < selected_.size(); ++k) {
        auto trial = selected_;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
        Evaluation ev = evalWith(trial);
        if (ev.total() < current_.total() - kImprovement) {
          selected_ = std::move(trial);
          current_ = std::move(ev);
          dropped = true;
          break;
        }
      }
    }
  }

  // Half the shortlist by coverage of the current literal runs, half by
  // corpus-wide support.
  std::vector<std::size_t> shortlistCandidates() const {
    const auto& bodies = pool_.bodies();
    std::vector<std::size_t> inLiterals(bodies.size(), 0);
    for (std::size_t it = 0; it < c_.items.size(); ++it) {
      const auto& units = current_.units[it];
      for (std::size_t u = 0; u < units.size();) {
        if (units[u].pattern >= 0) {
          ++u;
          continue;
        }
        std::size_t v = u;
        while (v < units.size() && units[v].pattern < 0) ++v;
        const std::size_t end = units[v - 1].begin + 1;
        for (std::size_t i = units[u].begin; i < end; ++i) {
          pool_.trie().scan(c_.items[it], i, end, [&](std::size_t b) { ++inLiterals[b]; });
        }
        u = v;
      }
    }

    std::vector<std::uint8_t> chosen(bodies.size(), 0);
    for (const auto& s : selected_) chosen[pool_.indexOf(s)] = 1;

    auto rankBy = [&](auto metric) {
      std::vector<std::pair<std::size_t, std::size_t>> scored;
      for (std::size_t b = 0; b < bodies.size(); ++b) {
        if (chosen[b]) continue;
        const std::size_t m = metric(b);
        if (m) scored.emplace_back(m, b);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      return scored;
    };
    const auto byLiterals = rankBy([&](std::size_t b) { return inLiterals[b] * (bodies[b].size() - 1); });
    const auto bySupport = rankBy([&](std::size_t b) { return pool_.info(b).support * (bodies[b].size() - 1); });

    const std::size_t half = std::max<std::size_t>(params_.shortlist / 2, 1);
    std::vector<std::size_t> out;
    auto take = [&](const auto& ranked) {
      std::size_t taken = 0;
      for (const auto& [m, b] : ranked) {
        if (taken == half) break;
        if (std::find(out.begin(), out.end(), b) != out.end()) continue;
        out.push_back(b);
        ++taken;
      }
    };
    take(byLiterals);
    take(bySupport);
    return out;
  }

  const Corpus& c_;
  const Model& model_;
  const CandidatePool& pool_;
  const LearnParams& params_;
  std::vector<Seq> selected_;
  Evaluation current_;
};

// Literal runs and adjacent reference pairs of the current segmentation.
std::size_t harvest(const Corpus& c, const Evaluation& ev, const std::vector<Seq>& selected, const LearnParams& params,
                    std::mt19937_64& rng, CandidatePool& pool) {
  const std::size_t before = pool.size();
  std::set<Seq> runs;
  for (std::size_t it = 0; it < c.items.size(); ++it) {
    const auto& item = c.items[it];
    const auto& units = ev.units[it];
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (units[u].pattern >= 0 && u + 1 < units.size() && units[u + 1].pattern >= 0) {
        Seq merged = selected[static_cast<std::size_t>(units[u].pattern)];
        const auto& next = selected[static_cast<std::size_t>(units[u + 1].pattern)];
        merged.insert(merged.end(), next.begin(), next.end());
        pool.add(std::move(merged), CandidateOrigin::UnifiedMatch);
      }
      if (units[u].pattern < 0 && (u == 0 || units[u - 1].pattern >= 0)) {
        std::size_t v = u;
        while (v < units.size() && units[v].pattern < 0) ++v;
        Seq run(item.begin() + static_cast<std::ptrdiff_t>(units[u].begin),
                item.begin() + static_cast<std::ptrdiff_t>(units[v - 1].begin + 1));
        if (run.size() >= 2) runs.insert(run);
      }
    }
  }
  std::vector<Seq> runList(runs.begin(), runs.end());
  for (const auto& r : runList) pool.add(r, CandidateOrigin::Residue);
  unifyAll(runList, c, params, rng, pool);
  return pool.size() - before;
}

std::vector<std::vector<PatternId>> distributionalClasses(const Evaluation& ev, const std::vector<PatternId>& ids,
                                                          const Corpus& c) {
  const std::size_t n = ids.size();
  std::vector<std::set<std::pair<long, long>>> contexts(n);
  auto label = [&](const std::vector<Unit>& units, const Seq& item, long u) -> long {
    if (u < 0 || u >= static_cast<long>(units.size())) return -1;
    const auto& unit = units[static_cast<std::size_t>(u)];
    if (unit.pattern >= 0) return unit.pattern;
    return -2 - static_cast<long>(item[unit.begin]);
  };
  for (std::size_t it = 0; it < c.items.size(); ++it) {
    const auto& units = ev.units[it];
    for (long u = 0; u < static_cast<long>(units.size()); ++u) {
      const auto p = units[static_cast<std::size_t>(u)].pattern;
      if (p < 0) continue;
      contexts[static_cast<std::size_t>(p)].emplace(label(units, c.items[it], u - 1), label(units, c.items[it], u + 1));
    }
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      std::size_t shared = 0;
      for (const auto& ctx : contexts[p]) shared += contexts[q].count(ctx);
      if (shared >= 2) parent[find(q)] = find(p);
    }
  }
  std::map<std::size_t, std::vector<PatternId>> groups;
  for (std::size_t p = 0; p < n; ++p) groups[find(p)].push_back(ids[p]);
  std::vector<std::vector<PatternId>> out;
  for (auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

SymbolSeq toSymbols(const Seq& s, const Corpus& c) {
  SymbolSeq out;
  out.reserve(s.size());
  for (auto x : s) out.emplace_back(c.names[x]);
  return out;
}

}  // namespace

double grammarBits(const Grammar& g) {
  double total = 0.0;
  for (std::size_t o = 0; o < g.size(); ++o) {
    for (auto s : g.indexed(o)) total += g.costAt(s);
    const auto& info = g.identifierInfo(o);
    const auto row = g.indexed(o);
    for (auto pos : info.positions) total += g.costAt(row[pos]);
    total += kHeaderBits;
  }
  return total;
}

double rawCorpusBits(const std::vector<Pattern>& corpus) {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t n = 0;
  for (const auto& p : corpus) {
    for (const auto& s : p.symbols()) {
      ++counts[s.text()];
      ++n;
    }
  }
  double total = 0.0;
  for (const auto& [s, k] : counts) {
    total += static_cast<double>(k) * std::log2(static_cast<double>(n) / static_cast<double>(k));
  }
  return total;
}

DescriptionLengths describeLengths(const LearnResult& r) {
  DescriptionLengths d;
  d.grammarBits = grammarBits(r.grammar);
  for (const auto& e : r.encodings) d.encodingBits += bitSize(e, r.grammar);
  d.rawBits = r.ledger.rawBits;
  return d;
}

LearnResult learn(const std::vector<Pattern>& corpus, const LearnParams& params) {
  if (corpus.empty()) throw std::invalid_argument("learn needs a non-empty corpus");
  const Corpus c = intern(corpus);
  const Model model(c);
  std::mt19937_64 rng(params.seed);

  CandidatePool pool;
  unifyAll(c.items, c, params, rng, pool);
  pool.refresh(c);

  Selector selector(c, model, pool, params);
  selector.reset();
  selector.improve();
  for (std::size_t pass = 0; pass < params.maxPasses; ++pass) {
    const std::size_t added = harvest(c, selector.current(), selector.selected(), params, rng, pool);
    if (added == 0) break;
    pool.refresh(c);
    if (!selector.improve()) break;
  }

  // Sieve last, so a higher threshold can only remove patterns.
  std::vector<Seq> kept;
  std::vector<std::size_t> keptSupport;
  for (const auto& body : selector.selected()) {
    const std::size_t support = pool.info(pool.indexOf(body)).support;
    if (support >= params.rareThreshold) {
      kept.push_back(body);
      keptSupport.push_back(support);
    }
  }

  std::vector<const Seq*> ptrs;
  for (const auto& s : kept) ptrs.push_back(&s);
  const Evaluation finalEval = model.evaluate(ptrs, true);

  const std::string prefix = freshPrefix(c);
  std::vector<Pattern> patterns;
  std::vector<PatternId> ids;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto id = static_cast<PatternId>(k + 1);
    SymbolSeq body;
    body.emplace_back(fmt::format("{}{}", prefix, id));
    for (auto&& s : toSymbols(kept[k], c)) body.push_back(std::move(s));
    body.emplace_back(fmt::format("#{}{}", prefix, id));
    patterns.push_back(Pattern::makeOld(id, std::move(body), finalEval.frequency[k]));
    ids.push_back(id);
  }

  LearnResult r;
  r.grammar = Grammar(std::move(patterns), ServiceRule::fromDirective({prefix + "*", "#" + prefix + "*"}));
  r.support = std::move(keptSupport);
  r.encodings.reserve(corpus.size());
  for (const auto& item : corpus) r.encodings.push_back(encode(Pattern::makeNew(item.symbols()), r.grammar, params.search));
  r.ledger.rawBits = rawCorpusBits(corpus);
  r.ledger = describeLengths(r);

  for (std::size_t b = 0; b < pool.bodies().size(); ++b) {
    r.candidates.push_back({toSymbols(pool.bodies()[b], c), pool.info(b).support, pool.info(b).origin});
  }
  std::sort(r.candidates.begin(), r.candidates.end(),
            [](const CandidatePattern& a, const CandidatePattern& b) { return a.body < b.body; });
  if (params.learnClasses) r.classes = distributionalClasses(finalEval, ids, c);
  return r;
}

}  // namespace sp
