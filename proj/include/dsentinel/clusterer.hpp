// Attacker-infrastructure grouping. Abusive pages embed contact points and
// backend links — WhatsApp deep links, Telegram invites, social accounts,
// URL-shortener forwards, raw IP addresses. Pages operated by the same crew
// reuse them, so identifiers that co-occur on the hijacked pages of the same
// domains betray a common operation. This module extracts those identifiers
// from HTML, builds the co-occurrence graph, and groups identifiers with
// agglomerative hierarchical clustering over set-overlap distance.
//
// Extraction is pure per document and safe to run in parallel across
// documents; graph construction and clustering are single-threaded and fully
// deterministic — identical inputs (in any order) give identical results.
#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dsentinel::clusterer {

// ---------------------------------------------------------------------------
// Identifiers

enum class IdentifierKind {
  phone,          // WhatsApp deep-link phone number, digits only
  chat_handle,    // Telegram channel/user/invite ("telegram:…")
  social_account, // Twitter/Instagram/Facebook account ("<platform>:…")
  shortener_url,  // forwarding link on a known URL-shortener host
  ip_address,     // URL host that parses as an address, canonical text
};

std::string to_string(IdentifierKind kind);

struct Identifier {
  IdentifierKind kind = IdentifierKind::phone;
  std::string value;                        // normalized (see normalized())
  std::optional<std::string> country_code;  // phones only: dialing prefix

  // Total order (kind, value, country_code) — also the tie-break order used
  // by the clustering.
  auto operator<=>(const Identifier&) const = default;
};

// Re-applies the kind-specific normalization to the value: phones keep
// digits only and the country code is re-derived from them; handles and
// social accounts are lowercased; shortener values lowercase the host part
// and keep the path's case (short codes are case-sensitive); IP addresses
// are re-rendered in canonical text. Idempotent: normalized(normalized(x))
// == normalized(x), and everything extract_identifiers() emits is already a
// fixed point.
Identifier normalized(const Identifier& id);

// Dialing-prefix lookup on a digits-only phone number (longest match wins,
// prefixes are 1–3 digits). Unassigned prefix -> nullopt.
std::optional<std::string> phone_country_code(std::string_view digits);

// ---------------------------------------------------------------------------
// Extraction

// Hosts whose links count as shortener forwards. The default set covers the
// common bit.ly-class services; deployments can swap in their own list
// (data/shorteners.txt ships the same set as an editable starting point).
const std::set<std::string>& default_shortener_hosts();

// Parses a host-list file: one host per line, '#' comments, blank lines
// ignored, lowercased, a leading "www." is dropped.
std::set<std::string> parse_host_list(std::string_view text);

struct ExtractOptions {
  // Overrides default_shortener_hosts() when set.
  const std::set<std::string>* shortener_hosts = nullptr;
};

struct ExtractStats {
  std::size_t hrefs = 0;      // href values inspected
  std::size_t malformed = 0;  // matched an identifier host but failed to parse
};

// One identifier occurrence tied to the page's domain.
struct Extraction {
  Identifier identifier;
  std::string fqdn;

  bool operator==(const Extraction&) const = default;
};

// Scans the href attributes of <a> and <link> tags and returns the
// identifiers found, each tied to source_fqdn (normalized). Duplicates
// within one document are reported once, in document order. Malformed
// candidates (a wa.me link without a plausible number, a bare shortener
// homepage, …) are skipped and counted in stats.
std::vector<Extraction> extract_identifiers(std::string_view html,
                                            std::string_view source_fqdn,
                                            const ExtractOptions& options = {},
                                            ExtractStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Co-occurrence graph

struct IdentifierGraph {
  // Identifier -> set of domains whose pages carried it.
  std::map<Identifier, std::set<std::string>> nodes;
  // Unordered pair (first < second) -> number of shared domains. An edge
  // exists iff the two domain sets intersect; the weight is the
  // intersection size.
  std::map<std::pair<Identifier, Identifier>, std::size_t> edges;

  bool empty() const { return nodes.empty(); }
};

IdentifierGraph build_graph(const std::vector<Extraction>& extractions);

// Set-overlap distance between two nodes' domain sets: 1 − |A∩B| / |A∪B|.
// 0 means identical domain sets, 1 means no shared domain; a pseudometric
// (symmetric, zero on the diagonal, triangle inequality). Throws InputError
// if either identifier is not a node of the graph.
double identifier_distance(const Identifier& u, const Identifier& v,
                           const IdentifierGraph& graph);

// ---------------------------------------------------------------------------
// Hierarchical clustering

enum class Linkage { single, average, complete };

std::string to_string(Linkage linkage);
Linkage linkage_from(std::string_view name);  // throws InputError on unknown

struct Cluster {
  std::vector<Identifier> members;  // sorted
  std::set<std::string> domains;    // union of the members' domain sets

  bool operator==(const Cluster&) const = default;
};

struct MergeStep {
  std::size_t step = 0;              // 1-based, in merge order
  double distance = 0.0;             // inter-cluster distance of the merge
  std::vector<Identifier> members;   // the merged cluster's members, sorted

  bool operator==(const MergeStep&) const = default;
};

struct ClusterResult {
  std::vector<Cluster> clusters;   // partition of the nodes, ordered by
                                   // smallest member
  std::vector<MergeStep> merges;   // dendrogram: every merge performed,
                                   // distances non-decreasing
  double cutoff = 0.95;
  Linkage linkage = Linkage::average;

  bool operator==(const ClusterResult&) const = default;
};

// Agglomerative clustering over identifier_distance: repeatedly merges the
// closest pair of clusters while that distance is below the cutoff.
// Inter-cluster distance follows the linkage (average of all member-pair
// distances by default; single = min, complete = max). Ties are broken
// deterministically by the lexicographically smallest member of the
// candidate pair. Singletons are retained. Identifiers that share no domain
// are at distance 1, so clusters never span two components of the
// positive-weight co-occurrence graph.
//
// Throws InputError on an empty graph or a cutoff outside [0, 1].
ClusterResult hierarchical_cluster(const IdentifierGraph& graph,
                                   double cutoff = 0.95,
                                   Linkage linkage = Linkage::average);

// ---------------------------------------------------------------------------
// Reporting

struct ClusterStat {
  std::size_t cluster_index = 0;  // index into ClusterResult::clusters
  std::size_t identifier_count = 0;
  std::size_t domain_count = 0;

  bool operator==(const ClusterStat&) const = default;
};

// Table sorted by domain count descending, then identifier count
// descending, then original cluster order (stable).
std::vector<ClusterStat> cluster_stats(const ClusterResult& result);

// One JSON object per line: first the nodes ("type":"node", with kind,
// value, optional country_code, sorted domains and domain_count), then the
// edges ("type":"edge", endpoints a/b and shared_domains). Deterministic
// order for identical graphs.
std::string export_graph_json_lines(const IdentifierGraph& graph);

// CSV merge list: step,distance,member_count,members — members are
// space-joined "kind:value" tokens. Includes a header row.
std::string export_dendrogram_csv(const ClusterResult& result);

} // namespace dsentinel::clusterer
