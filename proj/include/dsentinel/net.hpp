// Thin POSIX socket layer: RAII descriptors, deadline-based I/O, UDP and TCP
// helpers. Everything here reports failure through return values; only
// construction-time programming errors throw.
#pragma once

#include "dsentinel/ip.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dsentinel::net {

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { close(); }
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();

private:
  int fd_ = -1;
};

struct Endpoint {
  IpAddr address;
  std::uint16_t port = 0;

  std::string to_string() const;
  // "127.0.0.1:5353" or "[::1]:5353".
  static std::optional<Endpoint> parse(std::string_view text);

  auto operator<=>(const Endpoint&) const = default;
};

// --- UDP ------------------------------------------------------------------

class UdpSocket {
public:
  UdpSocket() = default;

  // Binds to addr:port (port 0 picks an ephemeral port). Empty optional on
  // failure.
  static std::optional<UdpSocket> bind(const Endpoint& at);
  // Unbound socket for client use.
  static std::optional<UdpSocket> open(bool v6);

  bool send_to(const Endpoint& dst, std::span<const std::uint8_t> payload);
  // Blocks up to timeout_ms. Empty optional on timeout or error.
  std::optional<std::vector<std::uint8_t>> recv_from(Endpoint* src, int timeout_ms);

  Endpoint local_endpoint() const;
  bool valid() const { return fd_.valid(); }
  int raw_fd() const { return fd_.get(); }

private:
  Fd fd_;
};

// --- TCP ------------------------------------------------------------------

class TcpStream {
public:
  TcpStream() = default;
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {}

  static std::optional<TcpStream> connect(const Endpoint& to, int timeout_ms);

  // Writes the whole buffer or fails.
  bool write_all(std::span<const std::uint8_t> data, int timeout_ms = 10000);
  bool write_all(std::string_view data, int timeout_ms = 10000);
  // Reads up to max_len bytes; 0 = orderly EOF; nullopt = timeout/error.
  std::optional<std::size_t> read_some(std::uint8_t* buf, std::size_t max_len,
                                       int timeout_ms);
  bool read_exact(std::uint8_t* buf, std::size_t len, int timeout_ms);

  bool valid() const { return fd_.valid(); }
  void shutdown_write();
  void reset() { fd_ = Fd(); }
  int raw_fd() const { return fd_.get(); }

private:
  Fd fd_;
};

class TcpListener {
public:
  TcpListener() = default;

  static std::optional<TcpListener> bind(const Endpoint& at, int backlog = 32);

  // Blocks up to timeout_ms; empty optional on timeout.
  std::optional<TcpStream> accept(int timeout_ms);

  Endpoint local_endpoint() const;
  bool valid() const { return fd_.valid(); }
  int raw_fd() const { return fd_.get(); }

private:
  Fd fd_;
};

} // namespace dsentinel::net
