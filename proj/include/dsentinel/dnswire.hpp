// Minimal DNS message codec: the A/CNAME/NS/CAA subset the collector and the
// certificate analyzer need. Encoding never compresses names; decoding
// understands compression pointers.
#pragma once

#include "dsentinel/ip.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsentinel::dnswire {

enum class RType : std::uint16_t {
  A = 1,
  NS = 2,
  CNAME = 5,
  SOA = 6,
  AAAA = 28,
  CAA = 257,
};

enum class RCode : std::uint8_t {
  NoError = 0,
  FormErr = 1,
  ServFail = 2,
  NxDomain = 3,
  NotImp = 4,
  Refused = 5,
};

struct Question {
  std::string name; // normalized, no trailing dot
  std::uint16_t qtype = 0;
  std::uint16_t qclass = 1;
};

struct CaaData {
  std::uint8_t flags = 0;
  std::string tag;   // "issue", "issuewild", "iodef"
  std::string value; // CA identifier or URL
};

struct ResourceRecord {
  std::string name;
  std::uint16_t rtype = 0;
  std::uint16_t rclass = 1;
  std::uint32_t ttl = 300;

  // Exactly one of these carries the payload, keyed by rtype.
  IpAddr address;                // A / AAAA
  std::string target;            // CNAME / NS
  CaaData caa;                   // CAA
  std::vector<std::uint8_t> raw; // anything else

  static ResourceRecord a(std::string name, IpAddr addr, std::uint32_t ttl = 300);
  static ResourceRecord cname(std::string name, std::string target,
                              std::uint32_t ttl = 300);
  static ResourceRecord ns(std::string name, std::string target,
                           std::uint32_t ttl = 300);
  static ResourceRecord caa_record(std::string name, CaaData data,
                                   std::uint32_t ttl = 300);
};

struct Message {
  std::uint16_t id = 0;
  bool is_response = false;
  bool authoritative = false;
  bool truncated = false;
  bool recursion_desired = false;
  bool recursion_available = false;
  std::uint8_t opcode = 0;
  RCode rcode = RCode::NoError;
  std::vector<Question> questions;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authority;
  std::vector<ResourceRecord> additional;

  static Message query(std::uint16_t id, const std::string& name, RType type);
};

std::vector<std::uint8_t> encode(const Message& msg);
std::optional<Message> decode(std::span<const std::uint8_t> wire);

} // namespace dsentinel::dnswire
