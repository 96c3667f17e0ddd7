// Production probe transport: real TCP connects and HTTP exchanges against
// resolved addresses, paced by the shared rate limiter and accounted in the
// request ledger. ICMP needs raw-socket privilege this process does not
// assume, so the ICMP layer reports skipped; scenario-driven runs use the
// harness transport, which scripts ICMP.
#pragma once

#include "dsentinel/budget.hpp"
#include "dsentinel/clock.hpp"
#include "dsentinel/collector.hpp"

namespace dsentinel {

struct ProberOptions {
  int tcp_timeout_ms = 10000;
  int http_timeout_ms = 10000;
  int max_redirects = 3;
};

class NetProber final : public collector::ProbeTransport {
public:
  using Options = ProberOptions;

  // limiter/ledger/clock may be null: pacing and accounting are then
  // skipped (unit-test convenience; the pipeline always passes them).
  explicit NetProber(Options options = Options(), RateLimiter* limiter = nullptr,
                     RequestLedger* ledger = nullptr,
                     const Clock* clock = nullptr);

  void set_cycle(std::uint64_t cycle) { cycle_ = cycle; }

  collector::Tri icmp_ping(const IpAddr& addr) override;
  collector::Tri tcp_connect(const IpAddr& addr, std::uint16_t port) override;
  HttpProbeResult http_get(const IpAddr& addr, std::uint16_t port,
                           const std::string& fqdn) override;

private:
  Options options_;
  RateLimiter* limiter_;
  RequestLedger* ledger_;
  const Clock* clock_;
  std::uint64_t cycle_ = 0;
};

} // namespace dsentinel
