#include <benchmark/benchmark.h>

#include <random>
#include <thread>

#include "sp/builder.hpp"
#include "sp/codec.hpp"
#include "sp/learner.hpp"
#include "sp/match.hpp"
#include "sp/transmit.hpp"

namespace {

using namespace sp;

const Grammar& sentenceGrammar() {
  static const Grammar g = parseGrammar(
      "%SPG1\n"
      "@service #* S NP D N V A Num Nr Np Vp PL ; 0a 17 6 11 21\n"
      "1\tN Nr 6 a p p l e #N\n"
      "1\tN Np N Nr #N s #N\n"
      "1\tD 17 t h e #D\n"
      "1\tNP 0a D #D N #N #NP\n"
      "1\tV Vp 11 a r e #V\n"
      "1\tS Num ; NP #NP V #V A #A #S\n"
      "1\tA 21 s w e e t #A\n"
      "1\tNum PL ; Np Vp\n");
  return g;
}

const Pattern& sentence() {
  static const Pattern p = Pattern::makeNew(parseSymbols("t h e a p p l e s a r e s w e e t"));
  return p;
}

std::vector<Pattern> wordItems(std::size_t count, std::uint64_t seed) {
  static const char* const kWords[] = {"the", "cat", "dog", "sat", "on", "mat", "big", "red", "ran", "fast"};
  std::mt19937_64 rng(seed);
  std::vector<Pattern> out;
  for (std::size_t i = 0; i < count; ++i) {
    SymbolSeq s;
    const std::size_t words = 3 + rng() % 5;
    for (std::size_t w = 0; w < words; ++w) {
      for (const char* c = kWords[rng() % 10]; *c; ++c) s.emplace_back(std::string(1, *c));
    }
    out.push_back(Pattern::makeNew(std::move(s)));
  }
  return out;
}

void BM_FindMatches(benchmark::State& state) {
  const Grammar& g = sentenceGrammar();
  for (auto _ : state) benchmark::DoNotOptimize(matchAllOld(sentence().symbols(), g));
}
BENCHMARK(BM_FindMatches);

void BM_FindMatchesLong(benchmark::State& state) {
  const auto items = wordItems(64, 5);
  SymbolSeq query, target;
  for (std::size_t i = 0; i < 32; ++i) query.insert(query.end(), items[i].symbols().begin(), items[i].symbols().end());
  for (std::size_t i = 32; i < 64; ++i) target.insert(target.end(), items[i].symbols().begin(), items[i].symbols().end());
  const Grammar g({Pattern::makeOld(1, target)});
  SearchLimits limits;
  limits.exactThreshold = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(findMatches(query, target, g, limits));
  state.SetLabel(limits.exactThreshold == 0 ? "heuristic" : "exact");
}
BENCHMARK(BM_FindMatchesLong)->Arg(0)->Arg(1 << 20);

void BM_BuildSentence(benchmark::State& state) {
  const Grammar& g = sentenceGrammar();
  SearchParams p;
  p.beamWidth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(buildAlignments(sentence(), g, p));
}
BENCHMARK(BM_BuildSentence)->Arg(1)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  const Grammar& g = sentenceGrammar();
  for (auto _ : state) benchmark::DoNotOptimize(encode(sentence(), g));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

void BM_EncodeSegments(benchmark::State& state) {
  const Grammar& g = sentenceGrammar();
  for (auto _ : state) benchmark::DoNotOptimize(encodeSegments(sentence(), g));
}
BENCHMARK(BM_EncodeSegments);

void BM_DecodeWire(benchmark::State& state) {
  const Grammar& g = sentenceGrammar();
  const auto bytes = writeEncoding(encode(sentence(), g));
  for (auto _ : state) benchmark::DoNotOptimize(decode(readEncoding(bytes), g));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_DecodeWire);

void BM_Learn(benchmark::State& state) {
  const auto corpus = wordItems(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(learn(corpus));
}
BENCHMARK(BM_Learn)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_TransmitMemory(benchmark::State& state) {
  const auto corpus = wordItems(200, 3);
  const LearnResult learned = learn(corpus);
  for (auto _ : state) {
    auto [client, server] = memoryPipe();
    std::thread worker([&, &s = *server] { serveSession(s, learned.grammar); });
    const auto report = sendEncodings(*client, learned.encodings, corpus, learned.grammar);
    worker.join();
    state.counters["ratio"] = report.ratio;
  }
}
BENCHMARK(BM_TransmitMemory)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
