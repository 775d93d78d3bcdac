#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sp/error.hpp"

namespace sp {

class TransportError : public Error {
 public:
  using Error::Error;
};

/// A reliable, ordered, bidirectional byte stream.
class ByteStream {
 public:
  virtual ~ByteStream() = default;

  /// Writes everything or throws TransportError.
  virtual void write(std::span<const std::uint8_t> data) = 0;
  /// Reads up to data.size() bytes, blocking until at least one is
  /// available. Returns 0 once the peer has closed its side.
  virtual std::size_t read(std::span<std::uint8_t> data) = 0;
  /// Signals end of stream to the peer.
  virtual void closeWrite() = 0;

  /// Throws TransportError on a short read.
  void readExact(std::span<std::uint8_t> data);
};

/// Everything written through a memory pipe, per direction.
class WireCapture {
 public:
  void record(bool fromFirst, std::span<const std::uint8_t> data);
  std::vector<std::uint8_t> firstToSecond() const;
  std::vector<std::uint8_t> secondToFirst() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::uint8_t> forward_;
  std::vector<std::uint8_t> backward_;
};

/// Two connected in-memory endpoints. When `capture` is set, every byte
/// written in either direction is recorded there.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> memoryPipe(
    std::shared_ptr<WireCapture> capture = nullptr);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses `host:port`. Throws std::invalid_argument.
Endpoint parseEndpoint(std::string_view text);

std::unique_ptr<ByteStream> connectTcp(const Endpoint& endpoint);

class TcpListener {
 public:
  /// Binds and listens; port 0 picks a free port.
  explicit TcpListener(const Endpoint& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks for the next connection; returns nullptr once close() was called.
  std::unique_ptr<ByteStream> accept();
  /// Unblocks accept(). Safe to call from another thread.
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::mutex mutex_;
  bool closed_ = false;
};

}  // namespace sp
