#include "dsentinel/prober.hpp"

#include "dsentinel/httpclient.hpp"

namespace dsentinel {

using collector::Tri;

NetProber::NetProber(Options options, RateLimiter* limiter,
                     RequestLedger* ledger, const Clock* clock)
    : options_(options), limiter_(limiter), ledger_(ledger), clock_(clock) {}

Tri NetProber::icmp_ping(const IpAddr&) {
  // Raw ICMP sockets require privilege this process deliberately runs
  // without; reporting skipped keeps the layer honest instead of guessing.
  return Tri::skipped;
}

Tri NetProber::tcp_connect(const IpAddr& addr, std::uint16_t port) {
  auto stream =
      net::TcpStream::connect({addr, port}, options_.tcp_timeout_ms);
  return stream ? Tri::yes : Tri::no;
}

NetProber::HttpProbeResult NetProber::http_get(const IpAddr& addr,
                                               std::uint16_t port,
                                               const std::string& fqdn) {
  std::optional<RateLimiter::Slot> slot;
  if (limiter_) slot.emplace(limiter_->enter(fqdn));

  http::ClientConfig config;
  config.timeout_ms = options_.http_timeout_ms;
  config.max_redirects = options_.max_redirects;
  auto response = http::get({addr, port}, fqdn, "/", config);

  if (ledger_) {
    std::int64_t at = clock_ ? clock_->now() : 0;
    for (int i = 0; i < response.wire_requests; ++i) {
      ledger_->record(fqdn, i == 0 ? "probe" : "redirect", at, cycle_);
    }
  }

  HttpProbeResult out;
  out.completed = response.completed;
  out.status = response.status;
  out.body = std::move(response.body);
  out.headers = std::move(response.headers);
  return out;
}

} // namespace dsentinel
