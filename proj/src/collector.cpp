#include "dsentinel/collector.hpp"

#include "dsentinel/util.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

namespace dsentinel::collector {

using dnswire::RType;

std::string_view to_string(Tri t) {
  switch (t) {
    case Tri::yes: return "yes";
    case Tri::no: return "no";
    case Tri::skipped: return "skipped";
  }
  return "skipped";
}

std::string_view to_string(DanglingState s) {
  switch (s) {
    case DanglingState::active: return "active";
    case DanglingState::dangling_candidate: return "dangling_candidate";
    case DanglingState::not_cloud: return "not_cloud";
    case DanglingState::unresolved: return "unresolved";
  }
  return "unresolved";
}

std::string_view to_string(DanglingSignal s) {
  switch (s) {
    case DanglingSignal::none: return "none";
    case DanglingSignal::terminal_nxdomain: return "terminal-nxdomain";
    case DanglingSignal::provider_fingerprint: return "provider-fingerprint";
  }
  return "none";
}

Collector::Collector(const catalog::CloudCatalog* cat, CollectorConfig config,
                     const Clock* clock)
    : catalog_(cat), config_(std::move(config)), clock_(clock) {}

DnsObservation Collector::resolve_chain(const std::string& fqdn) {
  auto normalized = util::normalize_fqdn(fqdn);
  if (!normalized) throw InputError("not a resolvable name: '" + fqdn + "'");

  DnsObservation obs;
  obs.fqdn = *normalized;
  obs.observed_at = clock_->now();

  DnsClient dns(config_.resolver);
  std::string current = obs.fqdn;
  int hops = 0;

  while (true) {
    auto response = dns.query(current, RType::A);

    if (response.rcode == dnswire::RCode::NxDomain) {
      if (current == obs.fqdn) {
        obs.nxdomain = true;
        obs.cname_chain.clear();
        obs.a_results.clear();
      }
      // A chain whose terminal name is gone keeps the chain; the missing
      // a_results are the caller's signal.
      return obs;
    }
    if (response.rcode != dnswire::RCode::NoError) return obs;

    // Recursive resolvers may return several chain hops plus the terminal
    // addresses in one message; authoritative servers answer one step.
    std::map<std::string, std::string> aliases;
    std::map<std::string, std::vector<IpAddr>> addresses;
    for (const auto& rr : response.answers) {
      if (rr.rtype == static_cast<std::uint16_t>(RType::CNAME)) {
        aliases.emplace(rr.name, rr.target);
      } else if (rr.rtype == static_cast<std::uint16_t>(RType::A) ||
                 rr.rtype == static_cast<std::uint16_t>(RType::AAAA)) {
        addresses[rr.name].push_back(rr.address);
      }
    }

    bool advanced = false;
    for (auto it = aliases.find(current); it != aliases.end();
         it = aliases.find(current)) {
      const std::string& target = it->second;
      bool repeat =
          std::find(obs.cname_chain.begin(), obs.cname_chain.end(), target) !=
          obs.cname_chain.end();
      if (repeat) return obs; // loop-cut: stop at first repeated element
      obs.cname_chain.push_back(target);
      current = target;
      advanced = true;
      if (++hops >= config_.depth_cap) return obs;
    }

    if (auto it = addresses.find(current); it != addresses.end()) {
      obs.a_results = it->second;
      // Keep output independent of answer-section ordering.
      std::sort(obs.a_results.begin(), obs.a_results.end());
      return obs;
    }
    if (!advanced) return obs; // NODATA: name exists, no A and no CNAME
  }
}

std::optional<CollectedName> Collector::cloud_match(
    const DnsObservation& obs) const {
  // Terminal-most chain element wins: that is the name an attacker would
  // re-register.
  for (auto it = obs.cname_chain.rbegin(); it != obs.cname_chain.rend(); ++it) {
    std::optional<catalog::SuffixMatch> m;
    try {
      m = catalog_->match_suffix(*it);
    } catch (const InputError&) {
      continue; // junk targets occur in real zones; not a match
    }
    if (m) {
      return CollectedName{obs.fqdn, m->service,
                           m->service.user_nameable
                               ? std::optional<std::string>(m->freetext)
                               : std::nullopt};
    }
  }
  for (const auto& addr : obs.a_results) {
    auto m = catalog_->match_ip(addr);
    if (m) {
      catalog::CloudService svc;
      svc.provider = m->provider;
      svc.service_kind = m->service_kind;
      svc.user_nameable = false;
      return CollectedName{obs.fqdn, std::move(svc), std::nullopt};
    }
  }
  return std::nullopt;
}

std::vector<CollectedName> Collector::collect_fqdns(
    const std::vector<std::string>& fqdns) {
  if (fqdns.empty()) return {};

  std::vector<std::optional<CollectedName>> slots(fqdns.size());
  std::vector<std::uint8_t> transient(fqdns.size(), 0);
  std::atomic<std::size_t> cursor{0};

  auto work = [&] {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= fqdns.size()) return;
      try {
        auto obs = resolve_chain(fqdns[i]);
        if (!obs.nxdomain) slots[i] = cloud_match(obs);
        // NXDOMAIN names are silently excluded ("inaccessible domains are
        // automatically removed").
      } catch (const TransientResolutionError&) {
        transient[i] = 1;
      } catch (const InputError&) {
        // unparseable names are skipped, never fatal
      }
    }
  };

  std::size_t workers = std::clamp<std::size_t>(
      static_cast<std::size_t>(config_.workers), 1, fqdns.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  std::size_t failed = 0;
  for (auto f : transient) failed += f;
  if (failed == fqdns.size()) {
    throw TransientResolutionError(
        "resolver produced no answer for any of the " +
        std::to_string(fqdns.size()) + " names");
  }

  std::set<CollectedName> out;
  for (auto& slot : slots) {
    if (slot) out.insert(std::move(*slot));
  }
  return {out.begin(), out.end()};
}

namespace {

LivenessReport probe_observation(const DnsObservation& obs, ProbeLayers layers,
                                 ProbeTransport* transport,
                                 std::uint16_t http_port, std::int64_t now,
                                 ProbeTransport::HttpProbeResult* http_out) {
  LivenessReport report;
  report.fqdn = obs.fqdn;
  report.probed_at = now;

  if (obs.a_results.empty()) {
    // Nothing to connect to: every requested layer is conclusively
    // unresponsive, none is guessed.
    if (layers.icmp) report.icmp_responsive = Tri::no;
    if (layers.tcp) report.tcp_responsive = Tri::no;
    if (layers.http) report.http_responsive = Tri::no;
    return report;
  }

  const IpAddr& addr = obs.a_results.front();
  if (layers.icmp) report.icmp_responsive = transport->icmp_ping(addr);
  if (layers.tcp) {
    Tri t80 = transport->tcp_connect(addr, http_port);
    report.tcp_responsive = t80;
    if (t80 != Tri::yes) {
      Tri t443 = transport->tcp_connect(addr, 443);
      if (t443 == Tri::yes) report.tcp_responsive = Tri::yes;
      else if (t443 == Tri::no || t80 == Tri::no) report.tcp_responsive = Tri::no;
    }
  }
  if (layers.http) {
    auto result = transport->http_get(addr, http_port, obs.fqdn);
    report.http_responsive = result.completed ? Tri::yes : Tri::no;
    if (result.completed) report.http_status = result.status;
    if (http_out) *http_out = std::move(result);
  }
  return report;
}

} // namespace

LivenessReport Collector::probe_liveness(const std::string& fqdn,
                                         ProbeLayers layers,
                                         ProbeTransport* transport) {
  DnsObservation obs;
  try {
    obs = resolve_chain(fqdn);
  } catch (const TransientResolutionError&) {
    obs.fqdn = util::normalize_fqdn(fqdn).value_or(fqdn);
  }
  return probe_observation(obs, layers, transport, config_.http_port,
                           clock_->now(), nullptr);
}

DanglingStatus Collector::classify_dangling(const std::string& fqdn,
                                            ProbeTransport* transport,
                                            const FingerprintSet* fingerprints) {
  DanglingStatus st;
  st.fqdn = util::normalize_fqdn(fqdn).value_or(fqdn);

  try {
    st.observation = resolve_chain(fqdn);
  } catch (const TransientResolutionError&) {
    st.state = DanglingState::unresolved; // noise never becomes a candidate
    return st;
  }
  st.liveness.fqdn = st.fqdn;
  st.liveness.probed_at = clock_->now();

  if (st.observation.nxdomain) {
    st.state = DanglingState::unresolved;
    return st;
  }

  auto match = cloud_match(st.observation);
  if (!match) {
    st.state = DanglingState::not_cloud;
    return st;
  }
  st.cloud_pointing = true;
  st.service = match->service;
  if (match->service.user_nameable) st.freetext_label = match->freetext;

  if (st.observation.a_results.empty()) {
    // The terminal cloud name no longer resolves: the record points at a
    // released resource. No HTTP request needed (or possible).
    st.state = DanglingState::dangling_candidate;
    st.signal = DanglingSignal::terminal_nxdomain;
    st.service_available = Tri::no;
    st.liveness.icmp_responsive = Tri::skipped;
    st.liveness.tcp_responsive = Tri::skipped;
    st.liveness.http_responsive = Tri::no;
    return st;
  }

  // Terminal resolves; one HTTP exchange decides between a working resource
  // and a provider's not-found page on the shared frontend.
  ProbeTransport::HttpProbeResult http;
  st.liveness = probe_observation(st.observation, ProbeLayers{}, transport,
                                  config_.http_port, clock_->now(), &http);

  if (!http.completed) {
    // Server reachable at the transport level or not — either way there is
    // no exchange to judge, and absence of evidence stays conservative.
    st.state = DanglingState::active;
    st.service_available = Tri::skipped;
    return st;
  }

  auto fp = fingerprints
                ? fingerprints->match(st.service->provider, http.status, http.body)
                : std::nullopt;
  if (fp) {
    st.state = DanglingState::dangling_candidate;
    st.signal = DanglingSignal::provider_fingerprint;
    st.service_available = Tri::no;
  } else {
    st.state = DanglingState::active;
    st.service_available = Tri::yes;
  }
  return st;
}

// --- fingerprints ---------------------------------------------------------

FingerprintSet FingerprintSet::from_json_text(const std::string& text) {
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("fingerprints"))
    throw InputError("fingerprint file: not a fingerprint JSON document");
  FingerprintSet set;
  set.version_ = doc.value("version", 0);
  for (const auto& entry : doc["fingerprints"]) {
    Fingerprint fp;
    fp.provider = entry.value("provider", "");
    fp.service_kind = entry.value("service_kind", "");
    fp.status = entry.value("status", 0);
    for (const auto& marker : entry.value("body_markers", nlohmann::json::array())) {
      if (marker.is_string()) fp.body_markers.push_back(marker.get<std::string>());
    }
    if (fp.provider.empty() || fp.body_markers.empty())
      throw InputError("fingerprint file: entry without provider or markers");
    set.entries_.push_back(std::move(fp));
  }
  if (set.entries_.empty())
    throw InputError("fingerprint file: no fingerprints");
  return set;
}

FingerprintSet FingerprintSet::builtin() {
  // Mirrors data/fingerprints.json; kept inline so library users get
  // sensible behavior without a data directory.
  static const char* kBuiltin = R"({
    "version": 1,
    "fingerprints": [
      {"provider": "azure", "service_kind": "web_app", "status": 404,
       "body_markers": ["Web App - Not Found", "404 Web Site not found"]},
      {"provider": "azure", "service_kind": "cdn", "status": 404,
       "body_markers": ["The resource you are looking for has been removed"]},
      {"provider": "aws", "service_kind": "storage", "status": 404,
       "body_markers": ["<Code>NoSuchBucket</Code>",
                         "The specified bucket does not exist"]},
      {"provider": "heroku", "status": 404,
       "body_markers": ["There's nothing here, yet.",
                         "no-such-app.html", "herokucdn.com/error-pages"]},
      {"provider": "netlify", "status": 404,
       "body_markers": ["Not Found - Request ID:"]},
      {"provider": "pantheon", "status": 404,
       "body_markers": ["404 Unknown Site", "The gods are wise"]}
    ]
  })";
  return from_json_text(kBuiltin);
}

std::optional<Fingerprint> FingerprintSet::match(std::string_view provider_hint,
                                                 int status,
                                                 std::string_view body) const {
  std::string lowered = util::to_lower(body);
  for (const auto& fp : entries_) {
    if (!provider_hint.empty() && fp.provider != provider_hint) continue;
    if (fp.status != 0 && fp.status != status) continue;
    for (const auto& marker : fp.body_markers) {
      if (lowered.find(util::to_lower(marker)) != std::string::npos) return fp;
    }
  }
  return std::nullopt;
}

} // namespace dsentinel::collector
