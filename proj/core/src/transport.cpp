#include "sp/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <stdexcept>

#include <fmt/format.h>

namespace sp {

void ByteStream::readExact(std::span<std::uint8_t> data) {
  std::size_t got = 0;
  while (got < data.size()) {
    const std::size_t n = read(data.subspan(got));
    if (n == 0) throw TransportError(fmt::format("stream closed after {} of {} bytes", got, data.size()));
    got += n;
  }
}

void WireCapture::record(bool fromFirst, std::span<const std::uint8_t> data) {
  std::lock_guard lock(mutex_);
  auto& dst = fromFirst ? forward_ : backward_;
  dst.insert(dst.end(), data.begin(), data.end());
}

std::vector<std::uint8_t> WireCapture::firstToSecond() const {
  std::lock_guard lock(mutex_);
  return forward_;
}

std::vector<std::uint8_t> WireCapture::secondToFirst() const {
  std::lock_guard lock(mutex_);
  return backward_;
}

namespace {

class Channel {
 public:
  void push(std::span<const std::uint8_t> data) {
    {
      std::lock_guard lock(mutex_);
      if (closed_) throw TransportError("write to closed stream");
      buffer_.insert(buffer_.end(), data.begin(), data.end());
    }
    ready_.notify_all();
  }

  std::size_t pull(std::span<std::uint8_t> out) {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !buffer_.empty() || closed_; });
    const std::size_t n = std::min(out.size(), buffer_.size());
    std::copy_n(buffer_.begin(), n, out.begin());
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n));
    return n;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::uint8_t> buffer_;
  bool closed_ = false;
};

class MemoryStream : public ByteStream {
 public:
  MemoryStream(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out, std::shared_ptr<WireCapture> capture,
               bool first)
      : in_(std::move(in)), out_(std::move(out)), capture_(std::move(capture)), first_(first) {}
  ~MemoryStream() override {
    out_->close();
    in_->close();
  }

  void write(std::span<const std::uint8_t> data) override {
    if (capture_) capture_->record(first_, data);
    out_->push(data);
  }
  std::size_t read(std::span<std::uint8_t> data) override { return in_->pull(data); }
  void closeWrite() override { out_->close(); }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
  std::shared_ptr<WireCapture> capture_;
  bool first_;
};

class TcpStream : public ByteStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpStream() override { ::close(fd_); }

  void write(std::span<const std::uint8_t> data) override {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("send failed: {}", std::strerror(errno)));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::size_t read(std::span<std::uint8_t> data) override {
    while (true) {
      const ssize_t n = ::recv(fd_, data.data(), data.size(), 0);
      if (n >= 0) return static_cast<std::size_t>(n);
      if (errno == EINTR) continue;
      if (errno == ECONNRESET) return 0;
      throw TransportError(fmt::format("recv failed: {}", std::strerror(errno)));
    }
  }

  void closeWrite() override { ::shutdown(fd_, SHUT_WR); }

 private:
  int fd_;
};

addrinfo* resolve(const Endpoint& e, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(e.port);
  const int rc = ::getaddrinfo(e.host.empty() ? nullptr : e.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw TransportError(fmt::format("cannot resolve {}: {}", e.host, ::gai_strerror(rc)));
  return res;
}

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> memoryPipe(std::shared_ptr<WireCapture> capture) {
  auto ab = std::make_shared<Channel>();
  auto ba = std::make_shared<Channel>();
  return {std::make_unique<MemoryStream>(ba, ab, capture, true), std::make_unique<MemoryStream>(ab, ba, capture, false)};
}

Endpoint parseEndpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument(fmt::format("expected host:port, got '{}'", text));
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  if (e.host.size() >= 2 && e.host.front() == '[' && e.host.back() == ']') e.host = e.host.substr(1, e.host.size() - 2);
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || port.empty() || value > 65535) {
    throw std::invalid_argument(fmt::format("bad port in '{}'", text));
  }
  e.port = static_cast<std::uint16_t>(value);
  return e;
}

std::unique_ptr<ByteStream> connectTcp(const Endpoint& endpoint) {
  addrinfo* res = resolve(endpoint, false);
  int lastErr = 0;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      lastErr = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpStream>(fd);
    }
    lastErr = errno;
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw TransportError(
      fmt::format("cannot connect to {}:{}: {}", endpoint.host, endpoint.port, std::strerror(lastErr)));
}

TcpListener::TcpListener(const Endpoint& endpoint) {
  addrinfo* res = resolve(endpoint, true);
  int lastErr = 0;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      lastErr = errno;
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
      fd_ = fd;
      break;
    }
    lastErr = errno;
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) {
    throw TransportError(fmt::format("cannot listen on {}:{}: {}", endpoint.host, endpoint.port, std::strerror(lastErr)));
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                     : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
  close();
  ::close(fd_);
}

std::unique_ptr<ByteStream> TcpListener::accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      std::lock_guard lock(mutex_);
      if (closed_) {
        ::close(fd);
        return nullptr;
      }
      return std::make_unique<TcpStream>(fd);
    }
    if (errno == EINTR) continue;
    std::lock_guard lock(mutex_);
    if (closed_) return nullptr;
    throw TransportError(fmt::format("accept failed: {}", std::strerror(errno)));
  }
}

void TcpListener::close() {
  std::lock_guard lock(mutex_);
  if (closed_) return;
  closed_ = true;
  ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace sp
