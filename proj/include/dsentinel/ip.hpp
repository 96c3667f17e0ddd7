// IPv4/IPv6 address and CIDR block value types.
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dsentinel {

// An address is held as 16 bytes; IPv4 occupies the first 4 with is_v6=false.
struct IpAddr {
  std::array<std::uint8_t, 16> bytes{};
  bool is_v6 = false;

  static std::optional<IpAddr> parse(std::string_view text);
  static IpAddr v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d);

  std::string to_string() const;

  auto operator<=>(const IpAddr&) const = default;
};

struct Cidr {
  IpAddr base;
  int prefix_len = 0;

  // "10.0.0.0/8" or "2a05:d000::/29". A bare address is a host block.
  static std::optional<Cidr> parse(std::string_view text);

  bool contains(const IpAddr& addr) const;
  std::string to_string() const;

  auto operator<=>(const Cidr&) const = default;
};

} // namespace dsentinel
