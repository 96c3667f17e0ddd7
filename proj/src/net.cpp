#include "dsentinel/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace dsentinel::net {

void Fd::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::string Endpoint::to_string() const {
  if (address.is_v6) return "[" + address.to_string() + "]:" + std::to_string(port);
  return address.to_string() + ":" + std::to_string(port);
}

std::optional<Endpoint> Endpoint::parse(std::string_view text) {
  std::string host;
  std::string port_str;
  if (!text.empty() && text.front() == '[') {
    auto close_pos = text.find(']');
    if (close_pos == std::string_view::npos || close_pos + 1 >= text.size() ||
        text[close_pos + 1] != ':')
      return std::nullopt;
    host = std::string(text.substr(1, close_pos - 1));
    port_str = std::string(text.substr(close_pos + 2));
  } else {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    host = std::string(text.substr(0, colon));
    port_str = std::string(text.substr(colon + 1));
  }
  auto addr = IpAddr::parse(host);
  if (!addr || port_str.empty()) return std::nullopt;
  unsigned long port = 0;
  for (char c : port_str) {
    if (c < '0' || c > '9') return std::nullopt;
    port = port * 10 + static_cast<unsigned long>(c - '0');
    if (port > 65535) return std::nullopt;
  }
  return Endpoint{*addr, static_cast<std::uint16_t>(port)};
}

namespace {

socklen_t to_sockaddr(const Endpoint& ep, sockaddr_storage* out) {
  std::memset(out, 0, sizeof *out);
  if (ep.address.is_v6) {
    auto* sa = reinterpret_cast<sockaddr_in6*>(out);
    sa->sin6_family = AF_INET6;
    sa->sin6_port = htons(ep.port);
    std::memcpy(&sa->sin6_addr, ep.address.bytes.data(), 16);
    return sizeof(sockaddr_in6);
  }
  auto* sa = reinterpret_cast<sockaddr_in*>(out);
  sa->sin_family = AF_INET;
  sa->sin_port = htons(ep.port);
  std::memcpy(&sa->sin_addr, ep.address.bytes.data(), 4);
  return sizeof(sockaddr_in);
}

Endpoint from_sockaddr(const sockaddr_storage& ss) {
  Endpoint ep;
  if (ss.ss_family == AF_INET6) {
    const auto* sa = reinterpret_cast<const sockaddr_in6*>(&ss);
    ep.address.is_v6 = true;
    std::memcpy(ep.address.bytes.data(), &sa->sin6_addr, 16);
    ep.port = ntohs(sa->sin6_port);
  } else {
    const auto* sa = reinterpret_cast<const sockaddr_in*>(&ss);
    ep.address.is_v6 = false;
    std::memcpy(ep.address.bytes.data(), &sa->sin_addr, 4);
    ep.port = ntohs(sa->sin_port);
  }
  return ep;
}

bool wait_readable(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  int rc = ::poll(&p, 1, timeout_ms);
  return rc > 0 && (p.revents & (POLLIN | POLLHUP | POLLERR));
}

bool wait_writable(int fd, int timeout_ms) {
  pollfd p{fd, POLLOUT, 0};
  int rc = ::poll(&p, 1, timeout_ms);
  return rc > 0 && (p.revents & POLLOUT);
}

void set_nonblocking(int fd) {
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

} // namespace

// --- UDP --------------------------------------------------------------------

std::optional<UdpSocket> UdpSocket::bind(const Endpoint& at) {
  int family = at.address.is_v6 ? AF_INET6 : AF_INET;
  Fd fd(::socket(family, SOCK_DGRAM, 0));
  if (!fd.valid()) return std::nullopt;
  int one = 1;
  setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_storage ss;
  socklen_t len = to_sockaddr(at, &ss);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&ss), len) != 0)
    return std::nullopt;
  UdpSocket sock;
  sock.fd_ = std::move(fd);
  return sock;
}

std::optional<UdpSocket> UdpSocket::open(bool v6) {
  Fd fd(::socket(v6 ? AF_INET6 : AF_INET, SOCK_DGRAM, 0));
  if (!fd.valid()) return std::nullopt;
  UdpSocket sock;
  sock.fd_ = std::move(fd);
  return sock;
}

bool UdpSocket::send_to(const Endpoint& dst, std::span<const std::uint8_t> payload) {
  sockaddr_storage ss;
  socklen_t len = to_sockaddr(dst, &ss);
  ssize_t n = ::sendto(fd_.get(), payload.data(), payload.size(), 0,
                       reinterpret_cast<sockaddr*>(&ss), len);
  return n == static_cast<ssize_t>(payload.size());
}

std::optional<std::vector<std::uint8_t>> UdpSocket::recv_from(Endpoint* src,
                                                              int timeout_ms) {
  if (!wait_readable(fd_.get(), timeout_ms)) return std::nullopt;
  std::vector<std::uint8_t> buf(65536);
  sockaddr_storage ss{};
  socklen_t slen = sizeof ss;
  ssize_t n = ::recvfrom(fd_.get(), buf.data(), buf.size(), 0,
                         reinterpret_cast<sockaddr*>(&ss), &slen);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  if (src) *src = from_sockaddr(ss);
  return buf;
}

Endpoint UdpSocket::local_endpoint() const {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&ss), &len);
  return from_sockaddr(ss);
}

// --- TCP --------------------------------------------------------------------

std::optional<TcpStream> TcpStream::connect(const Endpoint& to, int timeout_ms) {
  int family = to.address.is_v6 ? AF_INET6 : AF_INET;
  Fd fd(::socket(family, SOCK_STREAM, 0));
  if (!fd.valid()) return std::nullopt;
  set_nonblocking(fd.get());
  sockaddr_storage ss;
  socklen_t len = to_sockaddr(to, &ss);
  int rc = ::connect(fd.get(), reinterpret_cast<sockaddr*>(&ss), len);
  if (rc != 0) {
    if (errno != EINPROGRESS) return std::nullopt;
    if (!wait_writable(fd.get(), timeout_ms)) return std::nullopt;
    int err = 0;
    socklen_t elen = sizeof err;
    getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &elen);
    if (err != 0) return std::nullopt;
  }
  return TcpStream(std::move(fd));
}

bool TcpStream::write_all(std::span<const std::uint8_t> data, int timeout_ms) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    if (!wait_writable(fd_.get(), timeout_ms)) return false;
    ssize_t n = ::send(fd_.get(), data.data() + sent, data.size() - sent,
                       MSG_NOSIGNAL);
    if (n <= 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool TcpStream::write_all(std::string_view data, int timeout_ms) {
  return write_all(
      std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()),
      timeout_ms);
}

std::optional<std::size_t> TcpStream::read_some(std::uint8_t* buf,
                                                std::size_t max_len,
                                                int timeout_ms) {
  if (!wait_readable(fd_.get(), timeout_ms)) return std::nullopt;
  ssize_t n = ::recv(fd_.get(), buf, max_len, 0);
  if (n < 0) return std::nullopt;
  return static_cast<std::size_t>(n);
}

bool TcpStream::read_exact(std::uint8_t* buf, std::size_t len, int timeout_ms) {
  std::size_t got = 0;
  while (got < len) {
    auto n = read_some(buf + got, len - got, timeout_ms);
    if (!n || *n == 0) return false;
    got += *n;
  }
  return true;
}

void TcpStream::shutdown_write() {
  if (fd_.valid()) ::shutdown(fd_.get(), SHUT_WR);
}

std::optional<TcpListener> TcpListener::bind(const Endpoint& at, int backlog) {
  int family = at.address.is_v6 ? AF_INET6 : AF_INET;
  Fd fd(::socket(family, SOCK_STREAM, 0));
  if (!fd.valid()) return std::nullopt;
  int one = 1;
  setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_storage ss;
  socklen_t len = to_sockaddr(at, &ss);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&ss), len) != 0)
    return std::nullopt;
  if (::listen(fd.get(), backlog) != 0) return std::nullopt;
  TcpListener out;
  out.fd_ = std::move(fd);
  return out;
}

std::optional<TcpStream> TcpListener::accept(int timeout_ms) {
  if (!wait_readable(fd_.get(), timeout_ms)) return std::nullopt;
  int client = ::accept(fd_.get(), nullptr, nullptr);
  if (client < 0) return std::nullopt;
  set_nonblocking(client);
  return TcpStream(Fd(client));
}

Endpoint TcpListener::local_endpoint() const {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&ss), &len);
  return from_sockaddr(ss);
}

} // namespace dsentinel::net
