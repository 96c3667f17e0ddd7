// Content snapshots: what a monitored name served at one instant, the
// deltas between two instants, and the fetcher that gathers them inside a
// strict two-requests-per-name budget.
#pragma once

#include "dsentinel/budget.hpp"
#include "dsentinel/clock.hpp"
#include "dsentinel/collector.hpp"
#include "dsentinel/httpclient.hpp"
#include "dsentinel/sitemap.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace dsentinel::snapshot {

struct Snapshot {
  std::string fqdn;
  std::int64_t fetched_at = 0;
  collector::DnsObservation dns;
  // Present iff the index exchange completed (a status line arrived);
  // connection failures leave it empty and the snapshot still records the
  // outage.
  std::optional<int> http_status;
  std::optional<std::string> index_html; // raw bytes, capped
  bool body_truncated = false;
  std::string detected_language = "und"; // primary tag or "und"
  std::optional<sitemap::Stats> sitemap;
  std::string content_hash; // digest of normalized index_html, "" when none

  // Stable identifier: "<fqdn>@<fetched_at>".
  std::string id() const;

  std::string to_json() const;
  // Throws InputError on malformed or wrong-schema input.
  static Snapshot from_json(const std::string& text);

  bool operator==(const Snapshot&) const = default;
};

struct KeywordDelta {
  std::vector<std::string> added;   // sorted, unique
  std::vector<std::string> removed; // sorted, unique

  bool operator==(const KeywordDelta&) const = default;
};

struct ChangeSet {
  std::string fqdn;
  std::string prev_id;
  std::string next_id;
  bool dns_changed = false;
  bool status_changed = false;
  bool sitemap_new = false;
  std::int64_t sitemap_growth_bytes = 0; // next − prev, 0 when either absent
  bool language_changed = false;
  KeywordDelta keyword_delta;

  bool operator==(const ChangeSet&) const = default;
};

// Pulls the comparison keywords out of one page body. Supplied by the
// abuse detector; a null extractor yields an empty delta.
using KeywordExtractor =
    std::function<std::vector<std::string>(const std::string& html)>;

// Field-by-field comparison of two snapshots of the same name, oldest
// first (equal timestamps allowed so self-diff is the zero ChangeSet).
// Throws InputError on mismatched fqdn or reversed order.
ChangeSet diff_snapshots(const Snapshot& prev, const Snapshot& next,
                         const KeywordExtractor& extract = nullptr);

struct FetchPolicy {
  bool want_sitemap = false; // spend the optional second request
};

struct SnapshotterOptions {
  std::uint16_t http_port = 80;     // harness scenarios run off-port
  std::size_t body_cap = 2 * 1024 * 1024;
  int http_timeout_ms = 10000;
};

// Fetches snapshots over the wire. Per fetch: one GET for the index page
// and, when the policy asks, exactly one more for sitemap discovery. The
// discovery request rotates per name across cycles: /sitemap.xml first,
// robots.txt after that fails, then the robots-announced URL.
class Snapshotter {
public:
  Snapshotter(collector::Collector* collector, const Clock* clock,
              RateLimiter* limiter = nullptr, RequestLedger* ledger = nullptr,
              SnapshotterOptions options = SnapshotterOptions());

  void set_cycle(std::uint64_t cycle) { cycle_ = cycle; }

  // Resolver outages propagate as TransientResolutionError; everything
  // else (dead host, error page) comes back as a recorded snapshot.
  Snapshot fetch(const std::string& fqdn, const FetchPolicy& policy);

private:
  enum class Route : std::uint8_t { sitemap_xml, robots_txt, direct };
  struct RouteState {
    Route route = Route::sitemap_xml;
    std::string url; // set once robots.txt announced a location
  };

  void fetch_sitemap(Snapshot& snap, const IpAddr& addr);
  void step_route(Snapshot& snap, const IpAddr& addr, RouteState& rs);
  http::Response issue(const IpAddr& addr, const std::string& fqdn,
                       const std::string& path, const char* kind);

  collector::Collector* collector_;
  const Clock* clock_;
  RateLimiter* limiter_;
  RequestLedger* ledger_;
  SnapshotterOptions options_;
  std::uint64_t cycle_ = 0;
  std::mutex routes_mu_;
  std::map<std::string, RouteState> routes_;
};

} // namespace dsentinel::snapshot
