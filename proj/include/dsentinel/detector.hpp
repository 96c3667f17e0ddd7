// The decision layer above signatures: abuse events, what a takeover of a
// given cloud resource lets the attacker do, how long a hijack lived, and
// the indicator-combination accounting across a detection run.
#pragma once

#include "dsentinel/catalog.hpp"
#include "dsentinel/collector.hpp"
#include "dsentinel/keywords.hpp"
#include "dsentinel/signature.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dsentinel::detector {

// What the attacker gains by holding the resource behind a dangling name.
enum class Capability { file, content, html, javascript, headers, https };

std::string_view to_string(Capability capability);

struct CapabilitySet {
  bool known = false; // false: service kind outside the capability model
  std::set<Capability> atoms;

  bool operator==(const CapabilitySet&) const = default;
};

// Static mapping from service kind to capabilities. Storage and CMS
// resources yield only provider-served static content (file, content,
// html, javascript); anything that terminates requests itself — web apps,
// CDN/load-balancing frontends, VMs — additionally controls headers and
// can obtain certificates (headers, https). Kinds outside the model
// return known=false rather than a guess.
CapabilitySet capabilities_for(catalog::ServiceKind kind);
CapabilitySet capabilities_for(const catalog::CloudService& service);

// --- abuse events --------------------------------------------------------

struct AbuseEvent {
  std::string fqdn;
  std::vector<std::string> matched_signature_ids;
  std::int64_t first_detected_at = 0;
  std::optional<std::int64_t> resolved_at; // DNS corrected, when observed
  keywords::Topic topic = keywords::Topic::other;
  catalog::CloudService cloud_service;
  CapabilitySet capability_set;
};

enum class LifespanState {
  closed,    // correction observed
  open,      // still abused as of the reference time
  corrupted, // correction precedes first abuse: excluded from histograms
};

struct Lifespan {
  LifespanState state = LifespanState::open;
  std::int64_t days = 0; // whole days, floored
};

// Lifespan = first abused sample to the correcting DNS record. Open events
// report days elapsed up to `as_of`. A resolved_at earlier than
// first_detected_at marks the event corrupted instead of producing a
// negative duration.
Lifespan abuse_lifespan(const AbuseEvent& event, std::int64_t as_of);

// The correction event: the first observation, after the hijacked resource
// was seen in the answer, where it no longer appears (record removed,
// NXDOMAIN, or repointed elsewhere). `hijacked_target` matches a CNAME
// target or the textual form of an address.
std::optional<std::int64_t> correction_time(
    const std::vector<collector::DnsObservation>& history,
    const std::string& hijacked_target);

// --- indicator accounting ------------------------------------------------

// Buckets detections by the exact combination of indicator kinds that
// fired, e.g. "keyword", "keyword+sitemap". Every detection lands in
// exactly one bucket, so the bucket counts sum to the total.
std::map<std::string, std::size_t> indicator_venn(
    const std::vector<std::set<signature::IndicatorKind>>& detections);

} // namespace dsentinel::detector
