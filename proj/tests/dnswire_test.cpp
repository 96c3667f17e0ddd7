#include "doctest.h"

#include "dsentinel/dnswire.hpp"

using namespace dsentinel;
using namespace dsentinel::dnswire;

TEST_CASE("query message round-trips through the codec") {
  auto q = Message::query(0x1234, "www.example.com", RType::A);
  auto wire = encode(q);
  auto back = decode(wire);
  REQUIRE(back.has_value());
  CHECK(back->id == 0x1234);
  CHECK_FALSE(back->is_response);
  CHECK(back->recursion_desired);
  REQUIRE(back->questions.size() == 1);
  CHECK(back->questions[0].name == "www.example.com");
  CHECK(back->questions[0].qtype == static_cast<std::uint16_t>(RType::A));
}

TEST_CASE("response with A, CNAME, and NS answers round-trips") {
  Message m = Message::query(7, "shop.example.com", RType::A);
  m.is_response = true;
  m.authoritative = true;
  m.answers.push_back(
      ResourceRecord::cname("shop.example.com", "shop.azurewebsites.net", 60));
  m.answers.push_back(
      ResourceRecord::a("shop.azurewebsites.net", IpAddr::v4(20, 1, 2, 3), 60));
  m.authority.push_back(ResourceRecord::ns("example.com", "ns1.example.com"));

  auto back = decode(encode(m));
  REQUIRE(back.has_value());
  CHECK(back->is_response);
  CHECK(back->authoritative);
  REQUIRE(back->answers.size() == 2);
  CHECK(back->answers[0].rtype == static_cast<std::uint16_t>(RType::CNAME));
  CHECK(back->answers[0].target == "shop.azurewebsites.net");
  CHECK(back->answers[1].address == IpAddr::v4(20, 1, 2, 3));
  CHECK(back->answers[1].ttl == 60);
  REQUIRE(back->authority.size() == 1);
  CHECK(back->authority[0].target == "ns1.example.com");
}

TEST_CASE("AAAA answers carry 16-byte addresses") {
  auto addr = IpAddr::parse("2001:db8::42");
  REQUIRE(addr.has_value());
  Message m = Message::query(9, "v6.example.com", RType::AAAA);
  m.is_response = true;
  m.answers.push_back(ResourceRecord::a("v6.example.com", *addr));
  auto back = decode(encode(m));
  REQUIRE(back.has_value());
  REQUIRE(back->answers.size() == 1);
  CHECK(back->answers[0].rtype == static_cast<std::uint16_t>(RType::AAAA));
  CHECK(back->answers[0].address == *addr);
}

TEST_CASE("CAA records round-trip tag and value") {
  Message m = Message::query(11, "example.com", RType::CAA);
  m.is_response = true;
  m.answers.push_back(ResourceRecord::caa_record(
      "example.com", CaaData{0, "issue", "letsencrypt.org"}));
  m.answers.push_back(ResourceRecord::caa_record(
      "example.com", CaaData{128, "issuewild", ";"}));
  auto back = decode(encode(m));
  REQUIRE(back.has_value());
  REQUIRE(back->answers.size() == 2);
  CHECK(back->answers[0].caa.tag == "issue");
  CHECK(back->answers[0].caa.value == "letsencrypt.org");
  CHECK(back->answers[1].caa.flags == 128);
  CHECK(back->answers[1].caa.value == ";");
}

TEST_CASE("NXDOMAIN responses carry the rcode through") {
  Message m = Message::query(3, "gone.example.com", RType::A);
  m.is_response = true;
  m.rcode = RCode::NxDomain;
  auto back = decode(encode(m));
  REQUIRE(back.has_value());
  CHECK(back->rcode == RCode::NxDomain);
  CHECK(back->answers.empty());
}

TEST_CASE("decoder follows compression pointers") {
  // Hand-built response: question www.example.com A, answer uses a pointer
  // back to offset 12 (start of the question name) for its owner name and a
  // partially compressed target ending in a pointer to "example.com".
  std::vector<std::uint8_t> wire = {
      0x00, 0x2a, // id
      0x81, 0x80, // response, RD, RA
      0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00,
      // question: 3www7example3com0  (name starts at offset 12)
      3, 'w', 'w', 'w', 7, 'e', 'x', 'a', 'm', 'p', 'l', 'e', 3, 'c', 'o',
      'm', 0,
      0x00, 0x05, // qtype CNAME
      0x00, 0x01, // qclass IN
      // answer: name = pointer to 12
      0xC0, 0x0C,
      0x00, 0x05, // CNAME
      0x00, 0x01,
      0x00, 0x00, 0x00, 0x3C, // ttl 60
      0x00, 0x06,             // rdlength 6
      3, 'c', 'd', 'n', 0xC0, 0x10, // "cdn" + pointer to offset 16 ("example.com")
  };
  auto back = decode(wire);
  REQUIRE(back.has_value());
  REQUIRE(back->questions.size() == 1);
  CHECK(back->questions[0].name == "www.example.com");
  REQUIRE(back->answers.size() == 1);
  CHECK(back->answers[0].name == "www.example.com");
  CHECK(back->answers[0].target == "cdn.example.com");
}

TEST_CASE("decoder rejects pointer loops instead of spinning") {
  std::vector<std::uint8_t> wire = {
      0x00, 0x01, 0x00, 0x00,
      0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
      // question name is a pointer to itself
      0xC0, 0x0C,
      0x00, 0x01, 0x00, 0x01,
  };
  CHECK_FALSE(decode(wire).has_value());
}

TEST_CASE("decoder rejects truncated packets") {
  auto q = Message::query(5, "example.com", RType::A);
  auto wire = encode(q);
  for (std::size_t cut = 1; cut < wire.size(); ++cut) {
    std::span<const std::uint8_t> part(wire.data(), wire.size() - cut);
    CHECK_FALSE(decode(part).has_value());
  }
}

TEST_CASE("owner names decode case-insensitively") {
  Message m = Message::query(2, "MiXeD.Example.COM", RType::A);
  auto back = decode(encode(m));
  REQUIRE(back.has_value());
  CHECK(back->questions[0].name == "mixed.example.com");
}
