#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "sp/builder.hpp"
#include "sp/codec.hpp"
#include "sp/error.hpp"
#include "sp/grammar.hpp"
#include "sp/inference.hpp"
#include "sp/learner.hpp"
#include "sp/render.hpp"
#include "sp/transmit.hpp"
#include "sp/transport.hpp"

namespace sp::cli {

namespace {

using Json = nlohmann::ordered_json;

// Failures of the user's input files, as opposed to runtime faults.
class InputError : public Error {
 public:
  using Error::Error;
};

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFile(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

// A whole file read as one New pattern; line breaks separate symbols.
Pattern loadItem(const std::string& path) { return Pattern::makeNew(parseSymbols(readFile(path))); }

struct SearchFlags {
  std::size_t beam = SearchParams{}.beamWidth;
  std::size_t iterations = SearchParams{}.maxIterations;
  bool allOrNothing = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--beam", beam, "Beam width")->check(CLI::PositiveNumber);
    cmd.add_option("--iterations", iterations, "Maximum search iterations")->check(CLI::NonNegativeNumber);
    cmd.add_flag("--all-or-nothing", allOrNothing, "Require every input symbol to be matched");
  }

  SearchParams params() const {
    SearchParams p;
    p.beamWidth = beam;
    p.maxIterations = iterations;
    p.allOrNothing = allOrNothing;
    return p;
  }
};

struct Options {
  std::string grammar;
  std::string input;
  std::string out;
  std::string endpoint;
  std::string config;
  std::string encoding;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rareThreshold;
  std::size_t width = 0;
  std::size_t maxSessions = 0;
  bool records = false;
  SearchFlags search;
};

int cmdParse(const Options& o, std::ostream& out) {
  const Grammar g = loadGrammarFile(o.grammar);
  const Pattern item = loadItem(o.input);
  auto ranked = buildAlignments(item, g, o.search.params());
  if (ranked.empty()) throw Error("no alignment satisfies the search constraints");
  const auto set = alignmentProbabilities(std::move(ranked), g);
  if (o.records) {
    writeRecords(out, {set.candidates.front()}, {set.probabilities.front()}, g);
    return kOk;
  }
  const Alignment& top = set.candidates.front();
  out << renderAlignment(top, g, o.width);
  fmt::print(out, "score={:.6f} probability={:.6f} old_rows={}\n", set.scores.front(), set.probabilities.front(),
             top.oldRows().size());
  const auto inferred = inferredSymbols(top, g);
  if (!inferred.empty()) {
    out << "inferred";
    for (const auto& s : inferred) fmt::print(out, " {}:{}", s.row, s.symbol.text());
    out << '\n';
  }
  return kOk;
}

int cmdAlign(const Options& o, std::ostream& out) {
  const Grammar g = loadGrammarFile(o.grammar);
  const Pattern item = loadItem(o.input);
  auto ranked = buildAlignments(item, g, o.search.params());
  if (ranked.empty()) {
    writeRecords(out, {}, {}, g);
    return kOk;
  }
  const auto set = alignmentProbabilities(std::move(ranked), g);
  writeRecords(out, set.candidates, set.probabilities, g);
  return kOk;
}

LearnParams learnParams(const Options& o) {
  LearnParams p;
  p.search = o.search.params();
  if (!o.config.empty()) {
    Json cfg;
    try {
      cfg = Json::parse(readFile(o.config));
    } catch (const Json::exception& e) {
      throw InputError(fmt::format("bad config '{}': {}", o.config, e.what()));
    }
    if (!cfg.is_object()) throw InputError("config must be a JSON object");
    try {
      for (const auto& [key, value] : cfg.items()) {
        if (key == "seed") p.seed = value.get<std::uint64_t>();
        else if (key == "rareThreshold") p.rareThreshold = value.get<std::size_t>();
        else if (key == "maxPasses") p.maxPasses = value.get<std::size_t>();
        else if (key == "pairSample") p.pairSample = value.get<std::size_t>();
        else if (key == "shortlist") p.shortlist = value.get<std::size_t>();
        else if (key == "learnClasses") p.learnClasses = value.get<bool>();
        else if (key == "beam") p.search.beamWidth = value.get<std::size_t>();
        else if (key == "iterations") p.search.maxIterations = value.get<std::size_t>();
        else throw InputError(fmt::format("unknown config key '{}'", key));
      }
    } catch (const Json::exception& e) {
      throw InputError(fmt::format("bad config value: {}", e.what()));
    }
  }
  if (o.seed) {
    p.seed = *o.seed;
  } else if (const char* env = std::getenv("SP_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      p.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw InputError(fmt::format("SP_SEED is not an unsigned integer: '{}'", env));
    }
  }
  if (o.rareThreshold) p.rareThreshold = *o.rareThreshold;
  return p;
}

int cmdLearn(const Options& o, std::ostream& out) {
  const auto corpus = loadCorpusFile(o.input);
  if (corpus.empty()) throw InputError(fmt::format("corpus '{}' has no items", o.input));
  const LearnParams params = learnParams(o);
  const LearnResult r = learn(corpus, params);

  Json ledger;
  ledger["seed"] = params.seed;
  ledger["items"] = corpus.size();
  ledger["grammarBits"] = r.ledger.grammarBits;
  ledger["encodingBits"] = r.ledger.encodingBits;
  ledger["rawBits"] = r.ledger.rawBits;
  ledger["totalBits"] = r.ledger.total();
  ledger["candidates"] = r.candidates.size();
  Json patterns = Json::array();
  for (std::size_t i = 0; i < r.grammar.size(); ++i) {
    const auto& p = r.grammar.patterns()[i];
    patterns.push_back(
        {{"id", p.id()}, {"frequency", p.frequency()}, {"support", r.support[i]}, {"symbols", joinSymbols(p.symbols())}});
  }
  ledger["patterns"] = std::move(patterns);
  ledger["classes"] = r.classes;

  writeFile(o.out, saveGrammar(r.grammar));
  writeFile(o.out + ".ledger.json", ledger.dump(2) + "\n");
  fmt::print(out, "patterns={} grammar_bits={:.3f} encoding_bits={:.3f} raw_bits={:.3f}\n", r.grammar.size(),
             r.ledger.grammarBits, r.ledger.encodingBits, r.ledger.rawBits);
  return kOk;
}

int cmdEncode(const Options& o, std::ostream& out) {
  const Grammar g = loadGrammarFile(o.grammar);
  const Pattern item = loadItem(o.input);
  const auto bytes = writeEncoding(encode(item, g, o.search.params()));
  const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (o.out.empty()) {
    out.write(view.data(), static_cast<std::streamsize>(view.size()));
  } else {
    writeFile(o.out, view);
  }
  return kOk;
}

Encoding loadEncodingFile(const std::string& path) {
  const std::string data = readFile(path);
  return readEncoding({reinterpret_cast<const std::uint8_t*>(data.data()), data.size()});
}

int cmdDecode(const Options& o, std::ostream& out) {
  const Grammar g = loadGrammarFile(o.grammar);
  const Pattern item = decode(loadEncodingFile(o.input), g);
  const std::string text = joinSymbols(item.symbols()) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    writeFile(o.out, text);
  }
  return kOk;
}

int cmdStats(const Options& o, std::ostream& out) {
  const Grammar g = loadGrammarFile(o.grammar);
  fmt::print(out, "grammar {}\npatterns {}\nsymbols {}\ntotal-weight {}\n", toHex(g.contentHash()), g.size(),
             g.symbolCodeLengths().size(), g.totalWeight());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& p = g.patterns()[i];
    if (g.identifierInfo(i).citable()) {
      fmt::print(out, "pattern {} freq={} identifier={}\n", p.id(), p.frequency(), joinSymbols(identifierRule(p, g)));
    } else {
      fmt::print(out, "pattern {} freq={} uncitable\n", p.id(), p.frequency());
    }
  }
  for (const auto& [symbol, bits] : g.symbolCodeLengths()) fmt::print(out, "symbol {} {:.6f}\n", symbol.text(), bits);
  if (!o.encoding.empty()) {
    const Encoding e = loadEncodingFile(o.encoding);
    const Pattern item = decode(e, g);
    std::size_t refs = 0;
    for (const auto& it : e.items) refs += std::holds_alternative<Reference>(it) ? 1 : 0;
    double raw = 0.0;
    for (const auto& s : item.symbols()) raw += g.literalCost(s);
    fmt::print(out, "encoding items={} references={} literals={} bits={:.6f} raw-bits={:.6f}\n", e.items.size(),
               refs, e.items.size() - refs, bitSize(e, g), raw);
  }
  return kOk;
}

int cmdServe(const Options& o, std::ostream& out) {
  const Grammar g = loadGrammarFile(o.grammar);
  Endpoint ep;
  try {
    ep = parseEndpoint(o.endpoint);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  Server server(g, ep);
  fmt::print(out, "listening on {}:{} grammar {}\n", ep.host, server.port(), toHex(g.contentHash()));
  out.flush();
  server.run(o.maxSessions);
  for (const auto& s : server.finishedSessions()) {
    fmt::print(out, "session items={} bytes_raw={} bytes_on_wire={}\n", s.itemsTransferred, s.bytesRaw,
               s.bytesOnWire);
  }
  return kOk;
}

int cmdSend(const Options& o, std::ostream& out, std::ostream& err) {
  const Grammar g = loadGrammarFile(o.grammar);
  const auto corpus = loadCorpusFile(o.input);
  Endpoint ep;
  try {
    ep = parseEndpoint(o.endpoint);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  try {
    auto stream = connectTcp(ep);
    const auto report = sendCorpus(*stream, corpus, g, o.search.params());
    fmt::print(out, "items={} bytes_raw={} bytes_on_wire={} ratio={:.6f}\n", report.items, report.bytesRaw,
               report.bytesOnWire, report.ratio);
    return kOk;
  } catch (const TransmitError& e) {
    fmt::print(err, "sp: {}\n", e.what());
    return e.code() == ProtocolCode::HashMismatch ? kInputError : kRuntimeError;
  } catch (const TransportError& e) {
    fmt::print(err, "sp: {}\n", e.what());
    return kRuntimeError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pattern alignment, compression and grammar induction", "sp"};
  app.require_subcommand(1);
  app.fallthrough(false);
  Options o;

  auto* parse = app.add_subcommand("parse", "Print the best alignment of an input against a grammar");
  auto* align = app.add_subcommand("align", "Print every ranked alignment in record form");
  auto* learnCmd = app.add_subcommand("learn", "Induce a grammar from a corpus");
  auto* encodeCmd = app.add_subcommand("encode", "Encode an input against a grammar");
  auto* decodeCmd = app.add_subcommand("decode", "Reconstruct an input from its encoding");
  auto* serve = app.add_subcommand("serve", "Receive encodings over TCP");
  auto* send = app.add_subcommand("send", "Send a corpus as encodings over TCP");
  auto* stats = app.add_subcommand("stats", "Describe a grammar and optionally an encoding");

  for (auto* cmd : {parse, align, encodeCmd, decodeCmd, serve, send, stats}) {
    cmd->add_option("--grammar", o.grammar, "Grammar file")->required();
  }
  for (auto* cmd : {parse, align, encodeCmd, learnCmd, send}) o.search.attach(*cmd);
  for (auto* cmd : {parse, align, encodeCmd, decodeCmd}) cmd->add_option("input", o.input, "Input file")->required();

  parse->add_option("--width", o.width, "Wrap the layout at this many characters");
  parse->add_flag("--records", o.records, "Record output instead of the layout");

  learnCmd->add_option("corpus", o.input, "Corpus file, one item per line")->required();
  learnCmd->add_option("--out", o.out, "Grammar file to write")->required();
  learnCmd->add_option("--seed", o.seed, "Random seed (default: $SP_SEED, else 0)");
  learnCmd->add_option("--rare-threshold", o.rareThreshold, "Minimum support for a learned pattern");
  learnCmd->add_option("--config", o.config, "JSON file with learning parameters");

  encodeCmd->add_option("--out", o.out, "Output file (default: standard output)");
  decodeCmd->add_option("--out", o.out, "Output file (default: standard output)");

  serve->add_option("--listen", o.endpoint, "host:port")->required();
  serve->add_option("--max-sessions", o.maxSessions, "Exit after this many sessions");

  send->add_option("--endpoint", o.endpoint, "host:port")->required();
  send->add_option("corpus", o.input, "Corpus file, one item per line")->required();

  stats->add_option("--encoding", o.encoding, "Encoding file to describe");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "sp: {}\n", e.what());
    if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) err << sub->help();
    return kUsage;
  }

  try {
    if (*parse) return cmdParse(o, out);
    if (*align) return cmdAlign(o, out);
    if (*learnCmd) return cmdLearn(o, out);
    if (*encodeCmd) return cmdEncode(o, out);
    if (*decodeCmd) return cmdDecode(o, out);
    if (*serve) return cmdServe(o, out);
    if (*send) return cmdSend(o, out, err);
    if (*stats) return cmdStats(o, out);
  } catch (const FormatError& e) {
    if (e.line() > 0) {
      fmt::print(err, "sp: line {}: {}\n", e.line(), e.what());
    } else {
      fmt::print(err, "sp: {}\n", e.what());
    }
    return kInputError;
  } catch (const InputError& e) {
    fmt::print(err, "sp: {}\n", e.what());
    return kInputError;
  } catch (const DecodeError& e) {
    fmt::print(err, "sp: {}\n", e.what());
    return kInputError;
  } catch (const GrammarError& e) {
    fmt::print(err, "sp: {}\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    fmt::print(err, "sp: {}\n", e.what());
    return kRuntimeError;
  }
  return kUsage;
}

}  // namespace sp::cli
