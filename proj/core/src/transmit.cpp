#include "sp/transmit.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sp/codec.hpp"

namespace sp {

namespace {

constexpr std::size_t kHandshakeBytes = kHandshakeMagic.size() + 1 + 32;
constexpr std::size_t kAckBytes = 1 + 32;

void putU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t getU32(std::span<const std::uint8_t, 4> b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

Digest itemDigest(const Pattern& p) { return sha256(joinSymbols(p.symbols())); }

void sendAck(ByteStream& s, ProtocolCode code, const Digest& d) {
  std::array<std::uint8_t, kAckBytes> ack{};
  ack[0] = static_cast<std::uint8_t>(code);
  std::copy(d.begin(), d.end(), ack.begin() + 1);
  s.write(ack);
}

void sendHandshake(ByteStream& s, const Grammar& g) {
  std::vector<std::uint8_t> hs(kHandshakeMagic.begin(), kHandshakeMagic.end());
  hs.push_back(kProtocolVersion);
  hs.insert(hs.end(), g.contentHash().begin(), g.contentHash().end());
  s.write(hs);
  std::array<std::uint8_t, 1> reply{};
  s.readExact(reply);
  const auto code = static_cast<ProtocolCode>(reply[0]);
  if (code == ProtocolCode::Ok) return;
  throw TransmitError(code, std::nullopt,
                      code == ProtocolCode::HashMismatch ? "server refused: grammar hash mismatch"
                                                         : fmt::format("server refused handshake (code {})", reply[0]));
}

void finishSession(ByteStream& s) {
  const std::array<std::uint8_t, 4> end{};
  s.write(end);
  s.closeWrite();
}

}  // namespace

SessionStats serveSession(ByteStream& stream, const Grammar& g, const ItemCallback& onItem) {
  SessionStats stats;
  std::array<std::uint8_t, kHandshakeBytes> hs{};
  stream.readExact(hs);
  ProtocolCode verdict = ProtocolCode::Ok;
  if (!std::equal(kHandshakeMagic.begin(), kHandshakeMagic.end(), hs.begin()) || hs[4] != kProtocolVersion) {
    verdict = ProtocolCode::BadHandshake;
  } else if (!std::equal(g.contentHash().begin(), g.contentHash().end(), hs.begin() + 5)) {
    verdict = ProtocolCode::HashMismatch;
  }
  const std::array<std::uint8_t, 1> reply{static_cast<std::uint8_t>(verdict)};
  stream.write(reply);
  if (verdict != ProtocolCode::Ok) {
    stream.closeWrite();
    return stats;
  }
  stats.negotiatedHash = g.contentHash();

  std::vector<std::uint8_t> payload;
  for (std::size_t ordinal = 0;; ++ordinal) {
    std::array<std::uint8_t, 4> prefix{};
    stream.readExact(prefix);
    const std::uint32_t length = getU32(prefix);
    if (length == 0) break;
    if (length > kMaxFrameBytes) {
      sendAck(stream, ProtocolCode::MalformedFrame, {});
      stream.closeWrite();
      return stats;
    }
    payload.resize(length);
    stream.readExact(payload);
    stats.bytesOnWire += 4 + length;

    Encoding e;
    try {
      e = readEncoding(payload);
    } catch (const DecodeError&) {
      sendAck(stream, ProtocolCode::MalformedFrame, {});
      continue;
    }
    std::optional<Pattern> item;
    try {
      item = decode(e, g);
    } catch (const Error&) {
      sendAck(stream, ProtocolCode::DecodeFailure, {});
      continue;
    }
    stats.bytesRaw += joinSymbols(item->symbols()).size() + 1;
    ++stats.itemsTransferred;
    if (onItem) onItem(ordinal, *item);
    sendAck(stream, ProtocolCode::Ok, itemDigest(*item));
  }
  stream.closeWrite();
  return stats;
}

TransferReport sendEncodings(ByteStream& stream, const std::vector<Encoding>& encodings,
                             const std::vector<Pattern>& originals, const Grammar& g) {
  if (encodings.size() != originals.size()) {
    throw std::invalid_argument("encodings and originals differ in length");
  }
  sendHandshake(stream, g);

  TransferReport report;
  std::vector<std::uint8_t> frame;
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    const auto body = writeEncoding(encodings[i]);
    frame.clear();
    putU32(frame, static_cast<std::uint32_t>(body.size()));
    frame.insert(frame.end(), body.begin(), body.end());
    stream.write(frame);
    report.bytesOnWire += frame.size();
    report.bytesRaw += joinSymbols(originals[i].symbols()).size() + 1;

    std::array<std::uint8_t, kAckBytes> ack{};
    stream.readExact(ack);
    const auto code = static_cast<ProtocolCode>(ack[0]);
    if (code != ProtocolCode::Ok) {
      throw TransmitError(code, i, fmt::format("item {} refused by server (code {})", i, ack[0]));
    }
    const Digest expected = itemDigest(originals[i]);
    if (!std::equal(expected.begin(), expected.end(), ack.begin() + 1)) {
      throw TransmitError(ProtocolCode::DecodeFailure, i, fmt::format("item {} digest mismatch", i));
    }
    ++report.items;
  }
  finishSession(stream);
  if (report.bytesRaw > 0) {
    report.ratio = static_cast<double>(report.bytesOnWire) / static_cast<double>(report.bytesRaw);
  }
  return report;
}

TransferReport sendCorpus(ByteStream& stream, const std::vector<Pattern>& corpus, const Grammar& g,
                          const SearchParams& params) {
  std::vector<Encoding> encodings;
  encodings.reserve(corpus.size());
  for (const auto& item : corpus) encodings.push_back(encode(item, g, params));
  return sendEncodings(stream, encodings, corpus, g);
}

Server::Server(const Grammar& g, const Endpoint& listen) : grammar_(g), listener_(listen) {}

Server::~Server() {
  stop();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
}

void Server::run(std::size_t maxSessions) {
  for (std::size_t accepted = 0; maxSessions == 0 || accepted < maxSessions; ++accepted) {
    auto stream = listener_.accept();
    if (!stream) break;
    workers_.emplace_back([this, s = std::shared_ptr<ByteStream>(std::move(stream))] {
      SessionStats stats;
      try {
        stats = serveSession(*s, grammar_);
      } catch (const Error&) {
        return;
      }
      std::lock_guard lock(mutex_);
      finished_.push_back(stats);
    });
  }
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
}

void Server::stop() { listener_.close(); }

std::vector<SessionStats> Server::finishedSessions() const {
  std::lock_guard lock(mutex_);
  return finished_;
}

}  // namespace sp
