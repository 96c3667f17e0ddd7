#include "doctest.h"

#include "dsentinel/net.hpp"

#include <thread>

using namespace dsentinel;
using namespace dsentinel::net;

TEST_CASE("Endpoint parse and print") {
  auto ep = Endpoint::parse("127.0.0.1:5353");
  REQUIRE(ep.has_value());
  CHECK(ep->address == IpAddr::v4(127, 0, 0, 1));
  CHECK(ep->port == 5353);
  CHECK(ep->to_string() == "127.0.0.1:5353");

  auto v6 = Endpoint::parse("[::1]:53");
  REQUIRE(v6.has_value());
  CHECK(v6->port == 53);
  CHECK(v6->to_string() == "[::1]:53");

  CHECK_FALSE(Endpoint::parse("127.0.0.1").has_value());
  CHECK_FALSE(Endpoint::parse("127.0.0.1:99999").has_value());
  CHECK_FALSE(Endpoint::parse(":53").has_value());
}

TEST_CASE("udp sockets exchange datagrams on loopback") {
  auto server = UdpSocket::bind(Endpoint{IpAddr::v4(127, 0, 0, 1), 0});
  REQUIRE(server.has_value());
  auto where = server->local_endpoint();
  REQUIRE(where.port != 0);

  auto client = UdpSocket::open(false);
  REQUIRE(client.has_value());
  std::vector<std::uint8_t> ping{1, 2, 3, 4};
  REQUIRE(client->send_to(where, ping));

  Endpoint from{};
  auto got = server->recv_from(&from, 2000);
  REQUIRE(got.has_value());
  CHECK(*got == ping);

  std::vector<std::uint8_t> pong{9, 8, 7};
  REQUIRE(server->send_to(from, pong));
  auto back = client->recv_from(&from, 2000);
  REQUIRE(back.has_value());
  CHECK(*back == pong);
}

TEST_CASE("udp recv_from times out when nothing arrives") {
  auto sock = UdpSocket::bind(Endpoint{IpAddr::v4(127, 0, 0, 1), 0});
  REQUIRE(sock.has_value());
  auto got = sock->recv_from(nullptr, 50);
  CHECK_FALSE(got.has_value());
}

TEST_CASE("tcp connect, write, and read round-trip") {
  auto listener = TcpListener::bind(Endpoint{IpAddr::v4(127, 0, 0, 1), 0});
  REQUIRE(listener.has_value());
  auto where = listener->local_endpoint();

  std::thread server([&] {
    auto conn = listener->accept(2000);
    if (!conn) return;
    std::uint8_t buf[16];
    auto n = conn->read_some(buf, sizeof buf, 2000);
    if (n && *n > 0) conn->write_all(std::span<const std::uint8_t>(buf, *n));
  });

  auto client = TcpStream::connect(where, 2000);
  REQUIRE(client.has_value());
  REQUIRE(client->write_all(std::string_view("echo")));
  client->shutdown_write();
  std::uint8_t buf[16];
  auto n = client->read_some(buf, sizeof buf, 2000);
  REQUIRE(n.has_value());
  CHECK(std::string(reinterpret_cast<char*>(buf), *n) == "echo");
  server.join();
}

TEST_CASE("tcp connect to a closed port fails quickly") {
  // Bind then immediately drop a listener to find a port that is closed.
  std::uint16_t port;
  {
    auto l = TcpListener::bind(Endpoint{IpAddr::v4(127, 0, 0, 1), 0});
    REQUIRE(l.has_value());
    port = l->local_endpoint().port;
  }
  auto conn = TcpStream::connect(Endpoint{IpAddr::v4(127, 0, 0, 1), port}, 500);
  CHECK_FALSE(conn.has_value());
}

TEST_CASE("whole 127/8 range is bindable for vhost simulation") {
  auto a = TcpListener::bind(Endpoint{IpAddr::v4(127, 0, 0, 2), 0});
  REQUIRE(a.has_value());
  auto b = TcpListener::bind(Endpoint{IpAddr::v4(127, 0, 0, 3),
                                      a->local_endpoint().port});
  REQUIRE(b.has_value());
  CHECK(a->local_endpoint().port == b->local_endpoint().port);
}
