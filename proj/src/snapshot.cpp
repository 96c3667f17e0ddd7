#include "dsentinel/snapshot.hpp"

#include "dsentinel/html.hpp"
#include "dsentinel/langdetect.hpp"
#include "dsentinel/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

namespace dsentinel::snapshot {

namespace {

using nlohmann::json;

json dns_to_json(const collector::DnsObservation& dns) {
  json j;
  j["fqdn"] = dns.fqdn;
  j["cname_chain"] = dns.cname_chain;
  json addrs = json::array();
  for (const auto& a : dns.a_results) addrs.push_back(a.to_string());
  j["a_results"] = std::move(addrs);
  j["nxdomain"] = dns.nxdomain;
  j["observed_at"] = dns.observed_at;
  return j;
}

collector::DnsObservation dns_from_json(const json& j) {
  collector::DnsObservation dns;
  dns.fqdn = j.at("fqdn").get<std::string>();
  dns.cname_chain = j.at("cname_chain").get<std::vector<std::string>>();
  for (const auto& a : j.at("a_results")) {
    auto addr = IpAddr::parse(a.get<std::string>());
    if (!addr) throw InputError("snapshot: bad address " + a.get<std::string>());
    dns.a_results.push_back(*addr);
  }
  dns.nxdomain = j.at("nxdomain").get<bool>();
  dns.observed_at = j.at("observed_at").get<std::int64_t>();
  return dns;
}

json sitemap_to_json(const sitemap::Stats& s) {
  json j;
  j["url_count"] = s.url_count;
  j["total_size_bytes"] = s.total_size_bytes;
  j["sample_urls"] = s.sample_urls;
  j["name_entropy"] = s.name_entropy;
  j["well_formed"] = s.well_formed;
  j["is_index"] = s.is_index;
  j["unexpanded_children"] = s.unexpanded_children;
  return j;
}

sitemap::Stats sitemap_from_json(const json& j) {
  sitemap::Stats s;
  s.url_count = j.at("url_count").get<std::uint64_t>();
  s.total_size_bytes = j.at("total_size_bytes").get<std::uint64_t>();
  s.sample_urls = j.at("sample_urls").get<std::vector<std::string>>();
  s.name_entropy = j.at("name_entropy").get<double>();
  s.well_formed = j.at("well_formed").get<bool>();
  s.is_index = j.at("is_index").get<bool>();
  s.unexpanded_children = j.at("unexpanded_children").get<std::uint32_t>();
  return s;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

} // namespace

std::string Snapshot::id() const {
  return fqdn + "@" + std::to_string(fetched_at);
}

std::string Snapshot::to_json() const {
  json j;
  j["schema"] = 1;
  j["fqdn"] = fqdn;
  j["fetched_at"] = fetched_at;
  j["dns"] = dns_to_json(dns);
  if (http_status)
    j["http_status"] = *http_status;
  else
    j["http_status"] = nullptr;
  if (index_html)
    j["index_html_b64"] = util::base64_encode(*index_html);
  else
    j["index_html_b64"] = nullptr;
  j["body_truncated"] = body_truncated;
  j["detected_language"] = detected_language;
  if (sitemap)
    j["sitemap"] = sitemap_to_json(*sitemap);
  else
    j["sitemap"] = nullptr;
  j["content_hash"] = content_hash;
  return j.dump();
}

Snapshot Snapshot::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw InputError("snapshot: not a JSON object");
  try {
    if (j.at("schema").get<int>() != 1)
      throw InputError("snapshot: unsupported schema version");
    Snapshot s;
    s.fqdn = j.at("fqdn").get<std::string>();
    s.fetched_at = j.at("fetched_at").get<std::int64_t>();
    s.dns = dns_from_json(j.at("dns"));
    if (!j.at("http_status").is_null())
      s.http_status = j.at("http_status").get<int>();
    if (!j.at("index_html_b64").is_null()) {
      auto bytes = util::base64_decode(j.at("index_html_b64").get<std::string>());
      if (!bytes) throw InputError("snapshot: bad body encoding");
      s.index_html = std::move(*bytes);
    }
    s.body_truncated = j.at("body_truncated").get<bool>();
    s.detected_language = j.at("detected_language").get<std::string>();
    if (!j.at("sitemap").is_null()) s.sitemap = sitemap_from_json(j.at("sitemap"));
    s.content_hash = j.at("content_hash").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("snapshot: ") + e.what());
  }
}

ChangeSet diff_snapshots(const Snapshot& prev, const Snapshot& next,
                         const KeywordExtractor& extract) {
  if (prev.fqdn != next.fqdn)
    throw InputError("diff_snapshots: fqdn mismatch (" + prev.fqdn + " vs " +
                     next.fqdn + ")");
  // Equal timestamps are allowed so that diffing a snapshot against itself
  // is well-defined (and provably all-false).
  if (prev.fetched_at > next.fetched_at)
    throw InputError("diff_snapshots: snapshots out of order");

  ChangeSet out;
  out.fqdn = prev.fqdn;
  out.prev_id = prev.id();
  out.next_id = next.id();

  // Timing of the lookup is not a DNS change; the answer is.
  out.dns_changed = prev.dns.cname_chain != next.dns.cname_chain ||
                    prev.dns.a_results != next.dns.a_results ||
                    prev.dns.nxdomain != next.dns.nxdomain;
  out.status_changed = prev.http_status != next.http_status;
  out.sitemap_new = !prev.sitemap.has_value() && next.sitemap.has_value();
  if (prev.sitemap && next.sitemap) {
    out.sitemap_growth_bytes =
        static_cast<std::int64_t>(next.sitemap->total_size_bytes) -
        static_cast<std::int64_t>(prev.sitemap->total_size_bytes);
  }
  out.language_changed = prev.detected_language != next.detected_language;

  if (extract) {
    auto prev_kw = sorted_unique(
        prev.index_html ? extract(*prev.index_html) : std::vector<std::string>{});
    auto next_kw = sorted_unique(
        next.index_html ? extract(*next.index_html) : std::vector<std::string>{});
    std::set_difference(next_kw.begin(), next_kw.end(), prev_kw.begin(),
                        prev_kw.end(),
                        std::back_inserter(out.keyword_delta.added));
    std::set_difference(prev_kw.begin(), prev_kw.end(), next_kw.begin(),
                        next_kw.end(),
                        std::back_inserter(out.keyword_delta.removed));
  }
  return out;
}

// --- Snapshotter ------------------------------------------------------------

Snapshotter::Snapshotter(collector::Collector* collector, const Clock* clock,
                         RateLimiter* limiter, RequestLedger* ledger,
                         SnapshotterOptions options)
    : collector_(collector),
      clock_(clock),
      limiter_(limiter),
      ledger_(ledger),
      options_(options) {}

http::Response Snapshotter::issue(const IpAddr& addr, const std::string& fqdn,
                                  const std::string& path, const char* kind) {
  std::optional<RateLimiter::Slot> slot;
  if (limiter_) slot.emplace(limiter_->enter(fqdn));

  http::ClientConfig config;
  config.timeout_ms = options_.http_timeout_ms;
  config.body_cap = options_.body_cap;
  // A redirect is an answer in its own right here; following it would
  // breach the two-requests-per-name promise.
  config.max_redirects = 0;
  auto response =
      http::get({addr, options_.http_port}, fqdn, path, config);
  if (ledger_) ledger_->record(fqdn, kind, clock_->now(), cycle_);
  return response;
}

void Snapshotter::fetch_sitemap(Snapshot& snap, const IpAddr& addr) {
  RouteState rs;
  {
    std::lock_guard<std::mutex> lk(routes_mu_);
    rs = routes_[snap.fqdn];
  }
  // Worked on as a local copy: the map must not be held across network
  // calls, and concurrent fetches of other names share it.
  step_route(snap, addr, rs);
  std::lock_guard<std::mutex> lk(routes_mu_);
  routes_[snap.fqdn] = rs;
}

void Snapshotter::step_route(Snapshot& snap, const IpAddr& addr,
                             RouteState& rs) {
  switch (rs.route) {
    case Route::sitemap_xml: {
      auto r = issue(addr, snap.fqdn, "/sitemap.xml", "sitemap");
      if (r.completed && r.status == 200) {
        snap.sitemap = sitemap::parse(r.body, "http://" + snap.fqdn + "/");
      } else {
        // The well-known path is a miss; ask robots.txt next cycle.
        rs.route = Route::robots_txt;
      }
      return;
    }
    case Route::robots_txt: {
      auto r = issue(addr, snap.fqdn, "/robots.txt", "robots");
      if (r.completed && r.status == 200) {
        for (const auto& line : util::split(r.body, '\n')) {
          auto trimmed = util::trim(line);
          if (trimmed.size() > 8 &&
              util::iequals(std::string_view(trimmed).substr(0, 8),
                            "sitemap:")) {
            rs.url = util::trim(std::string_view(trimmed).substr(8));
            rs.route = Route::direct;
            return; // announced URL is fetched next cycle
          }
        }
      }
      // No directive (or no robots.txt): try the well-known path again
      // next cycle — sites grow sitemaps over time.
      rs.route = Route::sitemap_xml;
      return;
    }
    case Route::direct: {
      auto path = sitemap::url_path(rs.url);
      auto r = issue(addr, snap.fqdn, path, "sitemap");
      if (r.completed && r.status == 200) {
        snap.sitemap = sitemap::parse(r.body, rs.url);
      } else {
        // The announced location went away; rediscover from scratch.
        rs = RouteState{};
      }
      return;
    }
  }
}

Snapshot Snapshotter::fetch(const std::string& fqdn,
                            const FetchPolicy& policy) {
  Snapshot snap;
  snap.fqdn = fqdn;
  snap.fetched_at = clock_->now();
  snap.dns = collector_->resolve_chain(fqdn); // transient outages propagate

  if (snap.dns.a_results.empty()) {
    // Nothing to connect to: a snapshot of absence, zero requests.
    return snap;
  }

  const IpAddr& addr = snap.dns.a_results.front();
  auto index = issue(addr, fqdn, "/", "index");
  if (index.completed) {
    snap.http_status = index.status;
    snap.index_html = std::move(index.body);
    snap.body_truncated = index.body_truncated;
    snap.detected_language = lang::detect(html::extract_text(*snap.index_html));
    snap.content_hash = util::sha256_hex(html::normalize(*snap.index_html));
  }

  // The optional second request is spent only when the first one reached a
  // live HTTP speaker; probing paths on a dead host wastes budget.
  if (policy.want_sitemap && index.completed) fetch_sitemap(snap, addr);
  return snap;
}

} // namespace dsentinel::snapshot
