#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sp/builder.hpp"
#include "sp/codec.hpp"
#include "sp/digest.hpp"
#include "sp/error.hpp"
#include "sp/grammar.hpp"
#include "sp/transport.hpp"

namespace sp {

/// Handshake reply and per-frame acknowledgement codes.
enum class ProtocolCode : std::uint8_t {
  Ok = 0,
  BadHandshake = 1,
  HashMismatch = 2,
  MalformedFrame = 3,
  DecodeFailure = 4,
};

inline constexpr std::array<std::uint8_t, 4> kHandshakeMagic{'S', 'P', 'T', 'X'};
inline constexpr std::uint8_t kProtocolVersion = 1;
/// Frames longer than this are refused as malformed.
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

class TransmitError : public Error {
 public:
  TransmitError(ProtocolCode code, std::optional<std::size_t> item, const std::string& message)
      : Error(message), code_(code), item_(item) {}

  ProtocolCode code() const noexcept { return code_; }
  /// Zero-based ordinal of the refused item, when the error concerns one.
  std::optional<std::size_t> item() const noexcept { return item_; }

 private:
  ProtocolCode code_;
  std::optional<std::size_t> item_;
};

struct SessionStats {
  Digest negotiatedHash{};
  /// Σ over items of the raw text length plus its newline.
  std::uint64_t bytesRaw = 0;
  /// Σ over payload frames of the length prefix plus payload. The handshake,
  /// acknowledgements and the closing frame are not counted.
  std::uint64_t bytesOnWire = 0;
  std::uint64_t itemsTransferred = 0;
};

struct TransferReport {
  std::uint64_t bytesRaw = 0;
  std::uint64_t bytesOnWire = 0;
  /// bytesOnWire / bytesRaw, or 1.0 when nothing was sent.
  double ratio = 1.0;
  std::size_t items = 0;
};

using ItemCallback = std::function<void(std::size_t ordinal, const Pattern& item)>;

/// Runs the receiving side of one session to completion. A refused handshake
/// returns normally with itemsTransferred = 0 and the refusal already sent.
/// Frames that fail to parse or decode are answered with a negative
/// acknowledgement and the session continues. Throws TransportError when the
/// stream breaks.
SessionStats serveSession(ByteStream& stream, const Grammar& g, const ItemCallback& onItem = {});

/// Encodes every item against `g`, sends the frames and checks each
/// acknowledgement digest against the item. Throws TransmitError on a refused
/// handshake or a negative or inconsistent acknowledgement, TransportError
/// when the stream breaks.
TransferReport sendCorpus(ByteStream& stream, const std::vector<Pattern>& corpus, const Grammar& g,
                          const SearchParams& params = {});

/// Same exchange for items already encoded.
TransferReport sendEncodings(ByteStream& stream, const std::vector<Encoding>& encodings,
                             const std::vector<Pattern>& originals, const Grammar& g);

/// Accepts TCP sessions, one thread each, all sharing one grammar.
class Server {
 public:
  Server(const Grammar& g, const Endpoint& listen);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }

  /// Blocks until stop() is called or `maxSessions` sessions (0 = no limit)
  /// have been accepted, then waits for every session to finish.
  void run(std::size_t maxSessions = 0);
  void stop();

  std::vector<SessionStats> finishedSessions() const;

 private:
  const Grammar& grammar_;
  TcpListener listener_;
  mutable std::mutex mutex_;
  std::vector<SessionStats> finished_;
  std::vector<std::thread> workers_;
};

}  // namespace sp
