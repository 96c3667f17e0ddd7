#pragma once

#include "dsentinel/dnswire.hpp"
#include "dsentinel/net.hpp"

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsentinel::collector {

// The resolver did not produce any answer within the configured retry
// schedule. Deliberately distinct from NXDOMAIN, which is an authoritative
// "this name does not exist" and arrives as a normal response.
class TransientResolutionError : public std::runtime_error {
public:
  explicit TransientResolutionError(const std::string& what)
      : std::runtime_error(what) {}
};

struct ResolverConfig {
  net::Endpoint endpoint{IpAddr::v4(127, 0, 0, 1), 53};
  // Per-attempt wait for a response.
  int timeout_ms = 2000;
  // Sleep before each retry; size of this list = number of retries.
  std::vector<int> retry_backoff_ms = {1000, 3000};
};

// Stub resolver speaking plain DNS over UDP with TCP fallback on truncation.
// One in-flight query at a time; give each worker thread its own client.
class DnsClient {
public:
  explicit DnsClient(ResolverConfig config);

  // Sends one query and returns the raw response message. Throws
  // TransientResolutionError when every attempt times out. NXDOMAIN and
  // other rcodes come back as normal messages.
  dnswire::Message query(const std::string& name, dnswire::RType type);

  const ResolverConfig& config() const { return config_; }

private:
  std::optional<dnswire::Message> attempt_udp(
      const std::vector<std::uint8_t>& wire, std::uint16_t id);
  std::optional<dnswire::Message> attempt_tcp(
      const std::vector<std::uint8_t>& wire, std::uint16_t id);

  ResolverConfig config_;
  std::mt19937 id_rng_;
};

} // namespace dsentinel::collector
