#include "dsentinel/ip.hpp"

#include <arpa/inet.h>

#include <cstdio>
#include <cstring>

namespace dsentinel {

std::optional<IpAddr> IpAddr::parse(std::string_view text) {
  std::string s(text);
  IpAddr out;
  in_addr v4addr{};
  if (inet_pton(AF_INET, s.c_str(), &v4addr) == 1) {
    std::memcpy(out.bytes.data(), &v4addr, 4);
    out.is_v6 = false;
    return out;
  }
  in6_addr v6addr{};
  if (inet_pton(AF_INET6, s.c_str(), &v6addr) == 1) {
    std::memcpy(out.bytes.data(), &v6addr, 16);
    out.is_v6 = true;
    return out;
  }
  return std::nullopt;
}

IpAddr IpAddr::v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  IpAddr out;
  out.bytes[0] = a;
  out.bytes[1] = b;
  out.bytes[2] = c;
  out.bytes[3] = d;
  return out;
}

std::string IpAddr::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (is_v6) {
    inet_ntop(AF_INET6, bytes.data(), buf, sizeof buf);
  } else {
    inet_ntop(AF_INET, bytes.data(), buf, sizeof buf);
  }
  return buf;
}

std::optional<Cidr> Cidr::parse(std::string_view text) {
  std::string addr_part;
  int prefix = -1;
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    addr_part = std::string(text);
  } else {
    addr_part = std::string(text.substr(0, slash));
    auto plen = text.substr(slash + 1);
    if (plen.empty() || plen.size() > 3) return std::nullopt;
    prefix = 0;
    for (char c : plen) {
      if (c < '0' || c > '9') return std::nullopt;
      prefix = prefix * 10 + (c - '0');
    }
  }
  auto addr = IpAddr::parse(addr_part);
  if (!addr) return std::nullopt;
  int max_len = addr->is_v6 ? 128 : 32;
  if (prefix == -1) prefix = max_len;
  if (prefix < 0 || prefix > max_len) return std::nullopt;
  Cidr out;
  out.base = *addr;
  out.prefix_len = prefix;
  // Zero host bits so equal blocks compare equal.
  int addr_bits = addr->is_v6 ? 128 : 32;
  for (int bit = prefix; bit < addr_bits; ++bit) {
    out.base.bytes[bit / 8] &= static_cast<std::uint8_t>(~(0x80u >> (bit % 8)));
  }
  return out;
}

bool Cidr::contains(const IpAddr& addr) const {
  if (addr.is_v6 != base.is_v6) return false;
  int full_bytes = prefix_len / 8;
  if (std::memcmp(addr.bytes.data(), base.bytes.data(), full_bytes) != 0)
    return false;
  int rem = prefix_len % 8;
  if (rem == 0) return true;
  std::uint8_t mask = static_cast<std::uint8_t>(0xFF00u >> rem);
  return (addr.bytes[full_bytes] & mask) == (base.bytes[full_bytes] & mask);
}

std::string Cidr::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%d", base.to_string().c_str(), prefix_len);
  return buf;
}

} // namespace dsentinel
