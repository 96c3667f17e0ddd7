#include "dsentinel/detector.hpp"

#include <algorithm>

namespace dsentinel::detector {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

const std::set<Capability> kStaticContent = {
    Capability::file,
    Capability::content,
    Capability::html,
    Capability::javascript,
};

const std::set<Capability> kFullWebserver = {
    Capability::file,    Capability::content, Capability::html,
    Capability::javascript, Capability::headers, Capability::https,
};

bool observation_contains(const collector::DnsObservation& obs,
                          const std::string& target) {
  for (const auto& cname : obs.cname_chain) {
    if (util::iequals(cname, target)) return true;
  }
  for (const auto& addr : obs.a_results) {
    if (addr.to_string() == target) return true;
  }
  return false;
}

} // namespace

std::string_view to_string(Capability capability) {
  switch (capability) {
    case Capability::file: return "file";
    case Capability::content: return "content";
    case Capability::html: return "html";
    case Capability::javascript: return "javascript";
    case Capability::headers: return "headers";
    case Capability::https: return "https";
  }
  return "file";
}

CapabilitySet capabilities_for(catalog::ServiceKind kind) {
  using catalog::ServiceKind;
  switch (kind) {
    // The provider's webserver reads and returns attacker-supplied bytes;
    // the attacker never terminates the connection itself.
    case ServiceKind::storage:
    case ServiceKind::blob:
    case ServiceKind::cms:
      return {true, kStaticContent};
    // Requests are processed by something the attacker controls (or that
    // forwards to an endpoint the attacker names): response headers and
    // certificate issuance are on the table.
    case ServiceKind::web_app:
    case ServiceKind::orchestration:
    case ServiceKind::vm:
    case ServiceKind::cdn:
    case ServiceKind::load_balancer:
    case ServiceKind::traffic_manager:
    case ServiceKind::frontdoor:
      return {true, kFullWebserver};
    // Outside the capability model: report so, never guess.
    case ServiceKind::api:
    case ServiceKind::service_bus:
    case ServiceKind::unknown:
      return {false, {}};
  }
  return {false, {}};
}

CapabilitySet capabilities_for(const catalog::CloudService& service) {
  return capabilities_for(service.service_kind);
}

Lifespan abuse_lifespan(const AbuseEvent& event, std::int64_t as_of) {
  if (event.resolved_at) {
    if (*event.resolved_at < event.first_detected_at) {
      return {LifespanState::corrupted, 0};
    }
    return {LifespanState::closed,
            (*event.resolved_at - event.first_detected_at) / kSecondsPerDay};
  }
  auto elapsed = as_of - event.first_detected_at;
  if (elapsed < 0) elapsed = 0;
  return {LifespanState::open, elapsed / kSecondsPerDay};
}

std::optional<std::int64_t> correction_time(
    const std::vector<collector::DnsObservation>& history,
    const std::string& hijacked_target) {
  auto sorted = history;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     return a.observed_at < b.observed_at;
                   });
  bool seen_hijacked = false;
  for (const auto& obs : sorted) {
    if (observation_contains(obs, hijacked_target)) {
      seen_hijacked = true;
    } else if (seen_hijacked) {
      return obs.observed_at;
    }
  }
  return std::nullopt;
}

std::map<std::string, std::size_t> indicator_venn(
    const std::vector<std::set<signature::IndicatorKind>>& detections) {
  std::map<std::string, std::size_t> buckets;
  for (const auto& fired : detections) {
    std::string key;
    for (auto kind : fired) {
      if (!key.empty()) key += '+';
      key += to_string(kind);
    }
    if (key.empty()) key = "none";
    ++buckets[key];
  }
  return buckets;
}

} // namespace dsentinel::detector
