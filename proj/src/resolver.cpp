#include "dsentinel/resolver.hpp"

#include <chrono>
#include <thread>

namespace dsentinel::collector {

DnsClient::DnsClient(ResolverConfig config)
    : config_(std::move(config)),
      id_rng_(std::random_device{}()) {}

std::optional<dnswire::Message> DnsClient::attempt_udp(
    const std::vector<std::uint8_t>& wire, std::uint16_t id) {
  auto sock = net::UdpSocket::open(config_.endpoint.address.is_v6);
  if (!sock) return std::nullopt;
  if (!sock->send_to(config_.endpoint, wire)) return std::nullopt;

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(config_.timeout_ms);
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now())
                    .count();
    if (left <= 0) return std::nullopt;
    auto datagram = sock->recv_from(nullptr, static_cast<int>(left));
    if (!datagram) return std::nullopt;
    auto msg = dnswire::decode(*datagram);
    // Stray or mismatched datagrams don't consume the attempt.
    if (msg && msg->id == id && msg->is_response) return msg;
  }
}

std::optional<dnswire::Message> DnsClient::attempt_tcp(
    const std::vector<std::uint8_t>& wire, std::uint16_t id) {
  auto conn = net::TcpStream::connect(config_.endpoint, config_.timeout_ms);
  if (!conn) return std::nullopt;
  std::vector<std::uint8_t> framed;
  framed.push_back(static_cast<std::uint8_t>(wire.size() >> 8));
  framed.push_back(static_cast<std::uint8_t>(wire.size() & 0xFF));
  framed.insert(framed.end(), wire.begin(), wire.end());
  if (!conn->write_all(framed, config_.timeout_ms)) return std::nullopt;

  std::uint8_t lenbuf[2];
  if (!conn->read_exact(lenbuf, 2, config_.timeout_ms)) return std::nullopt;
  std::size_t len = static_cast<std::size_t>(lenbuf[0]) << 8 | lenbuf[1];
  if (len == 0 || len > 65535) return std::nullopt;
  std::vector<std::uint8_t> payload(len);
  if (!conn->read_exact(payload.data(), len, config_.timeout_ms))
    return std::nullopt;
  auto msg = dnswire::decode(payload);
  if (msg && msg->id == id && msg->is_response) return msg;
  return std::nullopt;
}

dnswire::Message DnsClient::query(const std::string& name,
                                  dnswire::RType type) {
  std::uint16_t id = static_cast<std::uint16_t>(id_rng_());
  auto msg = dnswire::Message::query(id, name, type);
  auto wire = dnswire::encode(msg);

  std::size_t attempts = 1 + config_.retry_backoff_ms.size();
  for (std::size_t i = 0; i < attempts; ++i) {
    if (i > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.retry_backoff_ms[i - 1]));
    }
    auto response = attempt_udp(wire, id);
    if (response && response->truncated) response = attempt_tcp(wire, id);
    if (response) return *response;
  }
  throw TransientResolutionError("no response for '" + name + "' from " +
                                 config_.endpoint.to_string() + " after " +
                                 std::to_string(attempts) + " attempts");
}

} // namespace dsentinel::collector
