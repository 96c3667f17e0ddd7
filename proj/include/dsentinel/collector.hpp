#pragma once

#include "dsentinel/catalog.hpp"
#include "dsentinel/clock.hpp"
#include "dsentinel/resolver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dsentinel::collector {

enum class Tri : std::uint8_t { yes, no, skipped };

std::string_view to_string(Tri t);

// One resolution of a name: the followed CNAME chain plus terminal
// addresses. nxdomain refers to the queried name itself; a chain whose
// *terminal* name is absent keeps nxdomain=false and simply has no
// a_results — that asymmetry is the dangling signal.
struct DnsObservation {
  std::string fqdn;
  std::vector<std::string> cname_chain; // targets in resolution order, no repeats
  std::vector<IpAddr> a_results;
  bool nxdomain = false;
  std::int64_t observed_at = 0;

  bool operator==(const DnsObservation&) const = default;
};

// Transport-layer truth only: http_responsive=yes means a status line came
// back, even if the status was an error page. Whether the *service* behind
// the virtual host exists is a classification question, not a probe result.
struct LivenessReport {
  std::string fqdn;
  Tri icmp_responsive = Tri::skipped;
  Tri tcp_responsive = Tri::skipped;  // ports 80/443, either counts
  Tri http_responsive = Tri::skipped; // Host header = fqdn itself
  std::optional<int> http_status;
  std::int64_t probed_at = 0;
};

enum class DanglingState : std::uint8_t {
  active,
  dangling_candidate,
  not_cloud,
  unresolved,
};

std::string_view to_string(DanglingState s);

// Which evidence marked a name dangling; the DNS signal is the terminal
// cloud name failing to resolve, the HTTP signal is a provider
// "resource not found" page served from a live endpoint.
enum class DanglingSignal : std::uint8_t {
  none,
  terminal_nxdomain,
  provider_fingerprint,
};

std::string_view to_string(DanglingSignal s);

struct DanglingStatus {
  std::string fqdn;
  bool cloud_pointing = false;
  std::optional<catalog::CloudService> service;
  std::optional<std::string> freetext_label;
  DanglingState state = DanglingState::unresolved;
  DanglingSignal signal = DanglingSignal::none;
  // service_available=no distinguishes "the shared cloud frontend answered
  // with its not-found page" from an actually working resource; transport
  // liveness alone cannot (virtual hosting).
  Tri service_available = Tri::skipped;
  LivenessReport liveness;
  DnsObservation observation;
};

// A name retained by Algorithm-1 collection, with the cloud service its
// chain or address matched. freetext is absent for IP-range matches — an
// address assignment carries no user-chosen name.
struct CollectedName {
  std::string fqdn;
  catalog::CloudService service;
  std::optional<std::string> freetext;

  friend bool operator<(const CollectedName& a, const CollectedName& b) {
    if (a.fqdn != b.fqdn) return a.fqdn < b.fqdn;
    if (a.service.provider != b.service.provider)
      return a.service.provider < b.service.provider;
    return a.service.suffix_pattern < b.service.suffix_pattern;
  }
  friend bool operator==(const CollectedName& a, const CollectedName& b) {
    return a.fqdn == b.fqdn && a.service.provider == b.service.provider &&
           a.service.suffix_pattern == b.service.suffix_pattern;
  }
};

// Provider "resource not found" page fingerprints, loaded from a versioned
// JSON fixture. A fingerprint matches when the status agrees (0 = any) and
// any one body marker occurs in the page (case-insensitive).
struct Fingerprint {
  std::string provider;
  std::string service_kind; // empty = any kind of that provider
  int status = 0;
  std::vector<std::string> body_markers;
};

class FingerprintSet {
public:
  static FingerprintSet from_json_text(const std::string& text);
  static FingerprintSet builtin();

  // provider_hint narrows the search when the chain already names the
  // provider; empty hint checks every fingerprint.
  std::optional<Fingerprint> match(std::string_view provider_hint, int status,
                                   std::string_view body) const;

  int version() const { return version_; }
  const std::vector<Fingerprint>& entries() const { return entries_; }

private:
  int version_ = 0;
  std::vector<Fingerprint> entries_;
};

// How a probe reaches the network. The production implementation drives
// real sockets; the harness implementation consults scenario toggles so
// ICMP behavior stays testable without raw-socket privilege.
class ProbeTransport {
public:
  virtual ~ProbeTransport() = default;
  // Tri::skipped when the runtime cannot perform the probe at all.
  virtual Tri icmp_ping(const IpAddr& addr) = 0;
  virtual Tri tcp_connect(const IpAddr& addr, std::uint16_t port) = 0;

  struct HttpProbeResult {
    bool completed = false; // status line received
    int status = 0;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
  };
  // GET / with Host = fqdn against addr:port.
  virtual HttpProbeResult http_get(const IpAddr& addr, std::uint16_t port,
                                   const std::string& fqdn) = 0;
};

struct ProbeLayers {
  bool icmp = true;
  bool tcp = true;
  bool http = true;
};

struct CollectorConfig {
  ResolverConfig resolver;
  int depth_cap = 16;
  int workers = 8;
  std::uint16_t http_port = 80; // harness scenarios run off-port
};

// Implements the collection pipeline: chain resolution, Algorithm-1
// selection, layered liveness probing, and dangling classification.
class Collector {
public:
  Collector(const catalog::CloudCatalog* cat, CollectorConfig config,
            const Clock* clock);

  // Follows CNAMEs depth-capped and loop-cut; never raises NXDOMAIN.
  DnsObservation resolve_chain(const std::string& fqdn);

  // Algorithm-1 selection over a name list: keep names whose chain ends in
  // a catalog suffix or whose address sits in a catalog range. Per-name
  // transient failures are skipped; if *every* name fails transiently the
  // resolver is considered down and the error propagates.
  std::vector<CollectedName> collect_fqdns(const std::vector<std::string>& fqdns);

  // Probes the requested layers against the name's resolved address, at
  // most once per layer. Needs a transport.
  LivenessReport probe_liveness(const std::string& fqdn, ProbeLayers layers,
                                ProbeTransport* transport);

  // Full per-name verdict; issues at most one HTTP request.
  DanglingStatus classify_dangling(const std::string& fqdn,
                                   ProbeTransport* transport,
                                   const FingerprintSet* fingerprints);

  // The service a finished observation matches, if any (suffix rows first,
  // terminal-most chain element wins; address ranges second).
  std::optional<CollectedName> cloud_match(const DnsObservation& obs) const;

private:
  const catalog::CloudCatalog* catalog_;
  CollectorConfig config_;
  const Clock* clock_;
};

} // namespace dsentinel::collector
