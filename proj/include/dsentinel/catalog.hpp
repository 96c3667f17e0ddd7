#pragma once

#include "dsentinel/ip.hpp"
#include "dsentinel/util.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsentinel::catalog {

// A feed document that is not recognizable as any supported format.
struct FeedFormatError : InputError {
  explicit FeedFormatError(const std::string& provider, const std::string& what)
      : InputError("feed for '" + provider + "': " + what), provider(provider) {}
  std::string provider;
};

// A document (or the whole document map) that parses but yields nothing.
struct EmptyFeedError : InputError {
  explicit EmptyFeedError(const std::string& what) : InputError(what) {}
};

enum class ServiceKind {
  web_app,
  vm,
  storage,
  traffic_manager,
  cdn,
  orchestration,
  cms,
  load_balancer,
  api,
  frontdoor,
  service_bus,
  blob,
  unknown,
};

std::string_view to_string(ServiceKind kind);
std::optional<ServiceKind> service_kind_from(std::string_view name);

// One row of the suffix table: a provider-generated name template with a
// single user-chosen slot, e.g. "[freetext].azurewebsites.net".
struct CloudService {
  std::string provider;
  ServiceKind service_kind = ServiceKind::unknown;
  std::string suffix_pattern;
  bool user_nameable = false;
};

struct IpRange {
  Cidr block;
  std::string provider;
  std::string tag; // feed-supplied service metadata ("S3", "AzureAppService", ...)
  ServiceKind service_kind = ServiceKind::unknown;
};

struct SuffixMatch {
  CloudService service;
  std::string freetext; // the user-chosen resource name (may span labels)
  std::string region;   // filled when the pattern carries a REGION slot
};

struct IpMatch {
  Cidr block;
  std::string provider;
  std::string tag;
  ServiceKind service_kind = ServiceKind::unknown;
};

class CloudCatalog {
public:
  // Answers whether the fqdn falls under a known provider-generated suffix,
  // matching whole labels only. Throws InputError for syntactically invalid
  // names. Most specific pattern (longest fixed tail) wins.
  std::optional<SuffixMatch> match_suffix(std::string_view fqdn) const;

  // Longest-prefix lookup over the loaded ranges; ties go to the block that
  // was loaded first.
  std::optional<IpMatch> match_ip(const IpAddr& addr) const;

  const std::vector<CloudService>& services() const { return services_; }
  const std::vector<IpRange>& ip_ranges() const { return ranges_; }
  const std::map<std::string, std::string>& feed_timestamps() const {
    return feed_timestamps_;
  }
  // Malformed or duplicate feed entries dropped during load, per provider.
  const std::map<std::string, std::size_t>& skipped_entries() const {
    return skipped_;
  }

  // Load-time construction hooks. A catalog is built single-threaded, then
  // treated as immutable; call index_ranges() once after the last add_range.
  // Duplicate provider+pattern / provider+block entries are dropped and
  // counted into *skipped when given.
  void add_service(CloudService service, std::size_t* skipped);
  void add_range(IpRange range, std::size_t* skipped);
  void index_ranges();

private:
  friend CloudCatalog load_provider_ranges(
      const std::map<std::string, std::string>& feed_documents);

  struct CompiledPattern {
    // Fixed labels right of the freetext slot, leftmost first. A label equal
    // to "REGION" matches any region-shaped label; a label containing
    // "REGION" (e.g. "s3-website-REGION") matches literal-prefix + region.
    std::vector<std::string> tail;
    // Allowed prefixes of the freetext label ("live-", ...). Empty vector
    // means no prefix requirement.
    std::vector<std::string> prefix_alts;
    std::size_t service_index = 0;
    std::size_t fixed_chars = 0; // specificity tie-break
  };

  struct TrieNode {
    std::int32_t child[2] = {-1, -1};
    std::int32_t range_index = -1;
  };

  std::optional<SuffixMatch> try_pattern(const CompiledPattern& pat,
                                         const std::vector<std::string>& labels) const;
  const IpRange* trie_lookup(const std::vector<TrieNode>& trie,
                             const std::uint8_t* bytes, int bits) const;
  void trie_insert(std::vector<TrieNode>* trie, const std::uint8_t* bytes,
                   int bits, std::int32_t range_index);

  std::vector<CloudService> services_;
  std::vector<CompiledPattern> patterns_;
  std::vector<IpRange> ranges_;
  std::vector<TrieNode> trie_v4_;
  std::vector<TrieNode> trie_v6_;
  std::map<std::string, std::string> feed_timestamps_;
  std::map<std::string, std::size_t> skipped_;
};

// Builds a catalog from provider-published documents keyed by provider name.
// Accepted formats per document: AWS range JSON ("prefixes" with "ip_prefix"),
// Azure service-tag JSON ("values" with "addressPrefixes"), Google cloud.json
// ("prefixes" with "ipv4Prefix"/"ipv6Prefix"), or the normalized catalog CSV
// (provider,service_kind,pattern,user_nameable; a CIDR in the pattern column
// defines an IP range instead of a suffix). The built-in suffix table is
// always merged in. Unrecognizable documents raise FeedFormatError; an empty
// map or a document yielding nothing raises EmptyFeedError.
CloudCatalog load_provider_ranges(
    const std::map<std::string, std::string>& feed_documents);

// The compiled-in suffix table alone (no IP ranges).
CloudCatalog builtin_catalog();

} // namespace dsentinel::catalog
