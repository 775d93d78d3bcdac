// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "cli.hpp"
#include "instances.hpp"
#include "oracle.hpp"
#include "sp/builder.hpp"
#include "sp/codec.hpp"
#include "sp/inference.hpp"
#include "sp/learner.hpp"
#include "sp/transmit.hpp"

namespace {

using namespace sp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string rowsText(const std::vector<PatternId>& rows) {
  std::string s;
  for (auto id : rows) s += (s.empty() ? "" : ",") + std::to_string(id);
  return "{" + s + "}";
}

const std::vector<PatternId> kSentenceRows{1, 2, 3, 4, 5, 6, 7, 8};

Verdict goldenParse() {
  const Grammar g = testing::sentenceGrammar();
  const auto t0 = Clock::now();
  const auto ranked = buildAlignments(testing::sentenceItem(), g);
  const double secs = since(t0);
  const auto rows = ranked.front().sortedRowIds();
  return {rows == kSentenceRows && secs < 1.0,
          fmt::format("rows {} score {:.4f} in {:.3f} s (limit 1 s)", rowsText(rows), ranked.front().score(), secs)};
}

Verdict robustness() {
  const Grammar g = testing::sentenceGrammar();
  const SymbolSeq s = testing::sentenceItem().symbols();
  const Symbol novel("z");
  std::vector<SymbolSeq> variants;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto v = s;
    v[i] = novel;
    variants.push_back(v);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto v = s;
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
    variants.push_back(v);
  }
  for (std::size_t i = 0; i <= s.size(); ++i) {
    auto v = s;
    v.insert(v.begin() + static_cast<std::ptrdiff_t>(i), novel);
    variants.push_back(v);
  }
  const auto t0 = Clock::now();
  std::size_t same = 0;
  for (const auto& v : variants) {
    if (buildAlignments(Pattern::makeNew(v), g).front().sortedRowIds() == kSentenceRows) ++same;
  }
  const double secs = since(t0);
  const double share = static_cast<double>(same) / static_cast<double>(variants.size());
  return {share >= 0.95 && secs < 30.0,
          fmt::format("{}/{} variants ({} substitutions, {} omissions, {} insertions) keep the rows, {:.1f}% in "
                      "{:.2f} s (limits 95%, 30 s)",
                      same, variants.size(), s.size(), s.size(), s.size() + 1, 100.0 * share, secs)};
}

Verdict roundTrip() {
  std::mt19937_64 rng(1);
  const auto t0 = Clock::now();
  std::size_t failures = 0;
  const std::size_t n = 10000;
  for (std::size_t k = 0; k < n; ++k) {
    auto inst = testing::randomInstance(rng, 4, 16, 5, 6);
    try {
      const auto wire = writeEncoding(encode(inst.data, inst.grammar));
      if (!(decode(readEncoding(wire), inst.grammar) == inst.data)) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  const double secs = since(t0);
  return {failures == 0 && secs < 60.0,
          fmt::format("{} pairs, {} failures, {:.2f} s (limit 60 s)", n, failures, secs)};
}

Verdict oracleEquivalence() {
  std::mt19937_64 rng(1);
  const std::size_t n = 500;
  std::size_t equal = 0, higher = 0;
  for (std::size_t k = 0; k < n; ++k) {
    auto inst = testing::randomInstance(rng, 3, 8);
    const double best = oracle::bestAlignment(inst.data, inst.grammar).score;
    const double beam = buildAlignments(inst.data, inst.grammar).front().score();
    if (std::abs(beam - best) <= 1e-9) {
      ++equal;
    } else if (beam > best) {
      ++higher;
    }
  }
  const double share = static_cast<double>(equal) / static_cast<double>(n);
  return {share >= 0.99 && higher == 0,
          fmt::format("{}/{} equal the exhaustive optimum ({:.1f}%, limit 99%), {} above it", equal, n, 100.0 * share,
                      higher)};
}

Verdict probabilityContract() {
  double worst = 0.0;
  std::size_t sets = 0;
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    auto inst = testing::randomInstance(rng, 3, 8);
    const auto set = alignmentProbabilities(buildAlignments(inst.data, inst.grammar), inst.grammar);
    worst = std::max(worst, std::abs(std::accumulate(set.probabilities.begin(), set.probabilities.end(), 0.0) - 1.0));
    ++sets;
  }

  // "a" cited through X (frequency 2) or Y (frequency 1): identifier costs
  // differ by exactly one bit; Z has the frequency of Y, so ties with it.
  const Grammar g = parseGrammar("2\tX a #X\n1\tY a #Y\n1\tZ a #Z\n");
  const Pattern a = Pattern::makeNew(parseSymbols("a"));
  auto single = [&](PatternId id) { return Alignment(a, {id}, {{{{0, 0}, {1, 1}}}}); };
  const auto tie = alignmentProbabilities({single(2), single(3)}, g);
  const auto gap = alignmentProbabilities({single(1), single(2)}, g);
  const bool tieOk = std::abs(tie.probabilities[0] - 0.5) <= 1e-9 && std::abs(tie.probabilities[1] - 0.5) <= 1e-9;
  const bool gapOk = std::abs(gap.scores[0] - gap.scores[1] - 1.0) <= 1e-12 &&
                     std::abs(gap.probabilities[0] - 2.0 / 3.0) <= 1e-9 &&
                     std::abs(gap.probabilities[1] - 1.0 / 3.0) <= 1e-9;
  return {worst <= 1e-9 && tieOk && gapOk,
          fmt::format("{} sets, max |sum-1| {:.1e}; tie {:.9f}/{:.9f}; 1-bit gap {:.9f}/{:.9f}", sets, worst,
                      tie.probabilities[0], tie.probabilities[1], gap.probabilities[0], gap.probabilities[1])};
}

Verdict learning() {
  const auto corpus = testing::wordCorpus({"the", "cat", "dog", "sat", "on", "mat", "big", "red", "ran", "fast"}, 200, 3,
                                          7, 7);
  const auto t0 = Clock::now();
  LearnParams params;
  params.seed = 7;
  const auto r = learn(corpus.items, params);
  const double secs = since(t0);

  std::size_t truePos = 0, predicted = 0, actual = 0;
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    std::set<std::size_t> cuts;
    std::size_t at = 0;
    for (const auto& item : r.encodings[i].items) {
      if (at > 0) cuts.insert(at);
      if (const auto* ref = std::get_if<Reference>(&item)) {
        at += contentSymbols(r.grammar.pattern(ref->pattern), r.grammar).size();
      } else {
        ++at;
      }
    }
    const std::set<std::size_t> truth(corpus.boundaries[i].begin(), corpus.boundaries[i].end());
    predicted += cuts.size();
    actual += truth.size();
    for (auto c : cuts) truePos += truth.count(c);
  }
  const double precision = predicted ? static_cast<double>(truePos) / static_cast<double>(predicted) : 0.0;
  const double recall = actual ? static_cast<double>(truePos) / static_cast<double>(actual) : 0.0;
  const double total = r.ledger.total();
  return {precision >= 0.8 && recall >= 0.8 && total < r.ledger.rawBits && secs < 120.0,
          fmt::format("{} patterns, boundary P {:.3f} R {:.3f} (limits 0.8), bits(G)+bits(E) {:.1f} < raw {:.1f}, "
                      "{:.2f} s (limit 120 s)",
                      r.grammar.size(), precision, recall, total, r.ledger.rawBits, secs)};
}

Verdict dirtyData() {
  const SymbolSeq clean = parseSymbols("t h e c a t s a t o n t h e m a t");
  SymbolSeq dirty = clean;
  dirty.insert(dirty.begin() + 6, {Symbol("q"), Symbol("z")});
  std::vector<Pattern> corpus(50, Pattern::makeNew(clean));
  corpus.insert(corpus.begin() + 25, Pattern::makeNew(dirty));
  const auto r = learn(corpus);

  bool absent = true;
  for (const auto& p : r.grammar.patterns()) {
    for (const auto& s : p.symbols()) absent &= s.text() != "q" && s.text() != "z";
  }
  const Pattern back = decode(readEncoding(writeEncoding(r.encodings[25])), r.grammar);
  const bool exact = back == corpus[25];
  return {absent && exact && !r.grammar.empty(),
          fmt::format("{} patterns learned, corrupted segment {} G, corrupted item round trip {}", r.grammar.size(),
                      absent ? "absent from" : "present in", exact ? "exact" : "differs")};
}

bool contains(const std::vector<std::uint8_t>& hay, const std::string& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

Verdict transmission() {
  const std::vector<std::string> phrases = {"the cat sat",   "on the mat", "a big red dog", "ran very fast",
                                            "in the park",   "every day",  "my old friend", "said hello",
                                            "under a tree",  "at noon",    "with a smile",  "went home"};
  std::vector<Pattern> patterns;
  for (std::size_t k = 0; k < phrases.size(); ++k) {
    SymbolSeq body{Symbol("P" + std::to_string(k + 1))};
    for (char c : phrases[k]) {
      if (c != ' ') body.emplace_back(std::string(1, c));
    }
    body.emplace_back("#P" + std::to_string(k + 1));
    patterns.push_back(Pattern::makeOld(static_cast<PatternId>(k + 1), std::move(body), 1 + k % 3));
  }
  const Grammar g(patterns);

  std::mt19937_64 rng(11);
  std::vector<Pattern> corpus;
  for (int i = 0; i < 1000; ++i) {
    SymbolSeq s;
    const std::size_t count = 6 + rng() % 5;
    for (std::size_t k = 0; k < count; ++k) {
      for (char c : phrases[rng() % phrases.size()]) {
        if (c != ' ') s.emplace_back(std::string(1, c));
      }
    }
    corpus.push_back(Pattern::makeNew(std::move(s)));
  }

  auto capture = std::make_shared<WireCapture>();
  auto [client, server] = memoryPipe(capture);
  std::vector<Pattern> received;
  SessionStats stats;
  std::thread worker([&, &srv = *server] {
    stats = serveSession(srv, g, [&](std::size_t, const Pattern& p) { received.push_back(p); });
  });
  SearchParams search;
  search.beamWidth = 2;
  search.maxIterations = 2;
  TransferReport report;
  std::string failure;
  try {
    report = sendCorpus(*client, corpus, g, search);
  } catch (const std::exception& e) {
    failure = e.what();
    client.reset();
  }
  worker.join();

  const auto up = capture->firstToSecond();
  const auto down = capture->secondToFirst();
  const std::vector<std::uint8_t> afterHandshake(up.begin() + std::min<std::ptrdiff_t>(37, up.size()), up.end());
  bool leaked = contains(afterHandshake, g.canonicalText()) || contains(down, g.canonicalText());
  for (const auto& p : g.patterns()) {
    const std::string text = joinSymbols(p.symbols());
    leaked |= contains(afterHandshake, text) || contains(down, text);
  }
  const bool digests = failure.empty() && report.items == corpus.size() && received == corpus;
  const bool economy = report.bytesOnWire * 2 < report.bytesRaw && stats.bytesOnWire == report.bytesOnWire;
  return {digests && economy && !leaked,
          fmt::format("{} items, bytesOnWire {} vs bytesRaw {} (ratio {:.3f}, limit 0.5), grammar {} the wire, "
                      "digests {}{}",
                      report.items, report.bytesOnWire, report.bytesRaw, report.ratio, leaked ? "crossed" : "never crossed",
                      digests ? "all verified" : "failed", failure.empty() ? "" : ": " + failure)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "sp-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data = SP_TEST_DATA_DIR;
  const std::string grammar = data + "/sentence.spg";
  const std::string sentence = data + "/sentence.txt";
  const auto corpus = testing::wordCorpus({"the", "cat", "dog", "sat", "on", "mat"}, 60, 3, 6, 2);
  {
    std::ofstream out(dir / "corpus.txt", std::ios::binary);
    out << formatCorpus(corpus.items);
  }
  std::uint16_t port = 0;
  {
    TcpListener probe({"127.0.0.1", 0});
    port = probe.port();
  }
  const std::string endpoint = "127.0.0.1:" + std::to_string(port);

  auto invoke = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return fmt::format("{}\n{}\n{}", code, out.str(), err.str());
  };

  // Each entry yields everything a command produced: exit code, both streams, written files.
  std::vector<std::pair<std::string, std::function<std::string(int)>>> commands = {
      {"parse", [&](int) { return invoke({"parse", "--grammar", grammar, sentence}); }},
      {"align", [&](int) { return invoke({"align", "--grammar", grammar, sentence}); }},
      {"stats", [&](int) { return invoke({"stats", "--grammar", grammar}); }},
      {"encode",
       [&](int run) {
         const auto out = (dir / fmt::format("s{}.spe", run)).string();
         return invoke({"encode", "--grammar", grammar, sentence, "--out", out}) + slurp(out);
       }},
      {"decode",
       [&](int run) {
         const auto in = (dir / fmt::format("s{}.spe", run)).string();
         return invoke({"decode", "--grammar", grammar, in});
       }},
      {"learn",
       [&](int run) {
         const auto out = (dir / fmt::format("g{}.spg", run)).string();
         return invoke({"learn", "--seed", "7", "--out", out, (dir / "corpus.txt").string()}) + slurp(out) +
                slurp(out + ".ledger.json");
       }},
      {"serve+send",
       [&](int run) {
         std::string served;
         std::thread server([&] {
           served = invoke({"serve", "--grammar", grammar, "--listen", endpoint, "--max-sessions", "1"});
         });
         std::string sent;
         for (int attempt = 0; attempt < 200; ++attempt) {
           sent = invoke({"send", "--grammar", grammar, "--endpoint", endpoint, sentence});
           if (sent.rfind("3\n", 0) != 0) break;
           std::this_thread::sleep_for(std::chrono::milliseconds(10));
         }
         server.join();
         (void)run;
         return sent + served;
       }},
  };

  std::vector<std::string> differing;
  for (const auto& [name, fn] : commands) {
    const std::string first = fn(1);
    const std::string second = fn(2);
    if (first != second || first.rfind("0\n", 0) != 0) differing.push_back(name);
  }
  fs::remove_all(dir);
  std::string names;
  for (const auto& [name, fn] : commands) names += (names.empty() ? "" : " ") + name;
  return {differing.empty(), differing.empty()
                                 ? fmt::format("{} commands rerun byte-identical: {}", commands.size(), names)
                                 : fmt::format("differing or failing: {}", fmt::join(differing, " "))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
      {"golden parse", goldenParse},
      {"robustness to errors", robustness},
      {"lossless round trip", roundTrip},
      {"oracle equivalence", oracleEquivalence},
      {"probability contract", probabilityContract},
      {"word discovery", learning},
      {"dirty-data sieve", dirtyData},
      {"transmission economy", transmission},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
