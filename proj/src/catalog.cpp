#include "dsentinel/catalog.hpp"

#include "json.hpp"

#include <algorithm>

namespace dsentinel::catalog {

using nlohmann::json;

std::string_view to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::web_app: return "web_app";
    case ServiceKind::vm: return "vm";
    case ServiceKind::storage: return "storage";
    case ServiceKind::traffic_manager: return "traffic_manager";
    case ServiceKind::cdn: return "cdn";
    case ServiceKind::orchestration: return "orchestration";
    case ServiceKind::cms: return "cms";
    case ServiceKind::load_balancer: return "load_balancer";
    case ServiceKind::api: return "api";
    case ServiceKind::frontdoor: return "frontdoor";
    case ServiceKind::service_bus: return "service_bus";
    case ServiceKind::blob: return "blob";
    case ServiceKind::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<ServiceKind> service_kind_from(std::string_view name) {
  static const std::pair<std::string_view, ServiceKind> table[] = {
      {"web_app", ServiceKind::web_app},
      {"vm", ServiceKind::vm},
      {"storage", ServiceKind::storage},
      {"traffic_manager", ServiceKind::traffic_manager},
      {"cdn", ServiceKind::cdn},
      {"orchestration", ServiceKind::orchestration},
      {"cms", ServiceKind::cms},
      {"load_balancer", ServiceKind::load_balancer},
      {"api", ServiceKind::api},
      {"frontdoor", ServiceKind::frontdoor},
      {"service_bus", ServiceKind::service_bus},
      {"blob", ServiceKind::blob},
      {"unknown", ServiceKind::unknown},
  };
  for (const auto& [text, kind] : table) {
    if (name == text) return kind;
  }
  return std::nullopt;
}

namespace {

// Provider-generated name templates and which ones take a user-chosen name.
// Patterns use one [freetext] slot, an optional REGION slot, and an optional
// leading alternation like [test-|dev-|live-].
struct BuiltinRow {
  const char* provider;
  ServiceKind kind;
  const char* pattern;
  bool user_nameable;
};

constexpr BuiltinRow kBuiltinSuffixes[] = {
    {"azure", ServiceKind::web_app, "[freetext].azurewebsites.net", true},
    {"azure", ServiceKind::traffic_manager, "[freetext].trafficmanager.net", true},
    {"azure", ServiceKind::vm, "[freetext].cloudapp.net", true},
    {"azure", ServiceKind::cdn, "[freetext].azureedge.net", true},
    {"azure", ServiceKind::vm, "[freetext].REGION.cloudapp.azure.com", true},
    {"azure", ServiceKind::web_app, "[freetext].sip.azurewebsites.windows.net", true},
    {"aws", ServiceKind::storage, "[freetext].s3-website.REGION.amazonaws.com", true},
    {"aws", ServiceKind::storage, "[freetext].s3-website-REGION.amazonaws.com", true},
    {"aws", ServiceKind::orchestration, "[freetext].REGION.elasticbeanstalk.com", true},
    {"heroku", ServiceKind::web_app, "[freetext].herokuapp.com", true},
    {"pantheon", ServiceKind::cms, "[test-|dev-|live-][freetext].pantheonsite.io", true},
    {"netlify", ServiceKind::web_app, "[freetext].netlify.app", true},
    // Cloud-pointing suffixes that do not hand out a user-chosen name slot.
    {"aws", ServiceKind::blob, "[freetext].s3.amazonaws.com", false},
    {"aws", ServiceKind::unknown, "[freetext].amazonaws.com", false},
    {"azure", ServiceKind::api, "[freetext].azure-api.net", false},
    {"azure", ServiceKind::frontdoor, "[freetext].azurefd.net", false},
    {"azure", ServiceKind::service_bus, "[freetext].servicebus.windows.net", false},
    {"azure", ServiceKind::blob, "[freetext].blob.core.windows.net", false},
    {"google", ServiceKind::web_app, "[freetext].appspot.com", false},
    {"google", ServiceKind::storage, "[freetext].storage.googleapis.com", false},
};

bool region_shaped(std::string_view label) {
  if (label.size() < 2 || label.size() > 32) return false;
  if (label.front() == '-' || label.back() == '-') return false;
  bool has_alpha = false;
  for (char c : label) {
    if (c >= 'a' && c <= 'z') has_alpha = true;
    else if ((c < '0' || c > '9') && c != '-') return false;
  }
  return has_alpha;
}

// Service tag strings as the providers publish them, mapped onto our kinds.
ServiceKind kind_from_feed_tag(std::string_view provider, std::string_view tag) {
  std::string t = util::to_lower(tag);
  if (provider == "aws") {
    if (t == "s3") return ServiceKind::storage;
    if (t == "ec2") return ServiceKind::vm;
    if (t == "cloudfront") return ServiceKind::cdn;
    if (t == "api_gateway") return ServiceKind::api;
    return ServiceKind::unknown;
  }
  if (provider == "azure") {
    if (t.starts_with("azureappservice")) return ServiceKind::web_app;
    if (t == "azuretrafficmanager") return ServiceKind::traffic_manager;
    if (t == "azurefrontdoor") return ServiceKind::frontdoor;
    if (t == "azurestorage") return ServiceKind::storage;
    if (t == "azureloadbalancer") return ServiceKind::load_balancer;
    if (t == "azurecdn") return ServiceKind::cdn;
    if (t == "servicebus") return ServiceKind::service_bus;
    return ServiceKind::unknown;
  }
  return ServiceKind::unknown;
}

bool parse_bool_field(std::string_view raw, bool* out) {
  std::string v = util::to_lower(util::trim(raw));
  // The column value may be bare ("true") or named ("user_nameable=true").
  auto eq = v.find('=');
  if (eq != std::string::npos) v = v.substr(eq + 1);
  if (v == "true" || v == "1" || v == "yes") { *out = true; return true; }
  if (v == "false" || v == "0" || v == "no") { *out = false; return true; }
  return false;
}

} // namespace

void CloudCatalog::add_service(CloudService service, std::size_t* skipped) {
  for (const auto& existing : services_) {
    if (existing.provider == service.provider &&
        existing.suffix_pattern == service.suffix_pattern) {
      if (skipped) ++*skipped; // provider+pattern pairs are unique; first wins
      return;
    }
  }

  CompiledPattern pat;
  std::string pattern = service.suffix_pattern;

  // Leading alternation: [test-|dev-|live-][freetext]...
  if (pattern.starts_with('[') && !pattern.starts_with("[freetext]")) {
    auto close = pattern.find(']');
    if (close == std::string::npos) {
      if (skipped) ++*skipped;
      return;
    }
    for (auto& alt : util::split(pattern.substr(1, close - 1), '|')) {
      std::string a = util::trim(alt);
      if (!a.empty()) pat.prefix_alts.push_back(a);
    }
    pattern = pattern.substr(close + 1);
  }

  if (!pattern.starts_with("[freetext].")) {
    if (skipped) ++*skipped;
    return;
  }
  pattern = pattern.substr(std::string_view("[freetext].").size());
  if (pattern.empty() || pattern.find("[freetext]") != std::string::npos) {
    if (skipped) ++*skipped; // exactly one freetext slot
    return;
  }

  for (auto& label : util::split(pattern, '.')) {
    if (label.empty()) {
      if (skipped) ++*skipped;
      return;
    }
    if (label.find("REGION") == std::string::npos) label = util::to_lower(label);
    pat.fixed_chars += label.size();
    pat.tail.push_back(label);
  }

  pat.service_index = services_.size();
  services_.push_back(std::move(service));
  patterns_.push_back(std::move(pat));
}

void CloudCatalog::add_range(IpRange range, std::size_t* skipped) {
  for (const auto& existing : ranges_) {
    if (existing.block == range.block && existing.provider == range.provider) {
      if (skipped) ++*skipped;
      return;
    }
  }
  ranges_.push_back(std::move(range));
}

void CloudCatalog::trie_insert(std::vector<TrieNode>* trie,
                               const std::uint8_t* bytes, int bits,
                               std::int32_t range_index) {
  if (trie->empty()) trie->emplace_back();
  std::int32_t node = 0;
  for (int bit = 0; bit < bits; ++bit) {
    int b = (bytes[bit / 8] >> (7 - bit % 8)) & 1;
    if ((*trie)[node].child[b] == -1) {
      (*trie)[node].child[b] = static_cast<std::int32_t>(trie->size());
      trie->emplace_back();
    }
    node = (*trie)[node].child[b];
  }
  // First-loaded block keeps the slot when two feeds publish the same prefix.
  if ((*trie)[node].range_index == -1) (*trie)[node].range_index = range_index;
}

const IpRange* CloudCatalog::trie_lookup(const std::vector<TrieNode>& trie,
                                         const std::uint8_t* bytes,
                                         int bits) const {
  if (trie.empty()) return nullptr;
  const IpRange* best = nullptr;
  std::int32_t node = 0;
  if (trie[node].range_index != -1) best = &ranges_[trie[node].range_index];
  for (int bit = 0; bit < bits; ++bit) {
    int b = (bytes[bit / 8] >> (7 - bit % 8)) & 1;
    node = trie[node].child[b];
    if (node == -1) break;
    if (trie[node].range_index != -1) best = &ranges_[trie[node].range_index];
  }
  return best;
}

void CloudCatalog::index_ranges() {
  trie_v4_.clear();
  trie_v6_.clear();
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    const auto& r = ranges_[i];
    auto* trie = r.block.base.is_v6 ? &trie_v6_ : &trie_v4_;
    trie_insert(trie, r.block.base.bytes.data(), r.block.prefix_len,
                static_cast<std::int32_t>(i));
  }
}

std::optional<SuffixMatch> CloudCatalog::try_pattern(
    const CompiledPattern& pat, const std::vector<std::string>& labels) const {
  std::size_t k = pat.tail.size();
  if (labels.size() < k + 1) return std::nullopt;

  std::string region;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string& want = pat.tail[i];
    const std::string& got = labels[labels.size() - k + i];
    if (want == "REGION") {
      if (!region_shaped(got)) return std::nullopt;
      region = got;
    } else if (auto marker = want.find("REGION"); marker != std::string::npos) {
      // Embedded form, e.g. "s3-website-REGION".
      std::string prefix = util::to_lower(want.substr(0, marker));
      if (got.size() <= prefix.size() || !got.starts_with(prefix))
        return std::nullopt;
      std::string rest = got.substr(prefix.size());
      if (!region_shaped(rest)) return std::nullopt;
      region = rest;
    } else if (want != got) {
      return std::nullopt;
    }
  }

  std::string freetext;
  for (std::size_t i = 0; i + k < labels.size(); ++i) {
    if (i) freetext.push_back('.');
    freetext += labels[i];
  }

  if (!pat.prefix_alts.empty()) {
    if (labels.size() != k + 1) return std::nullopt; // one prefixed label
    bool matched = false;
    for (const auto& alt : pat.prefix_alts) {
      if (freetext.size() > alt.size() && freetext.starts_with(alt)) {
        freetext = freetext.substr(alt.size());
        matched = true;
        break;
      }
    }
    if (!matched) return std::nullopt;
  }

  SuffixMatch m;
  m.service = services_[pat.service_index];
  m.freetext = std::move(freetext);
  m.region = std::move(region);
  return m;
}

std::optional<SuffixMatch> CloudCatalog::match_suffix(
    std::string_view fqdn) const {
  auto normalized = util::normalize_fqdn(fqdn);
  if (!normalized)
    throw InputError("not a valid domain name: '" + std::string(fqdn) + "'");
  auto labels = util::labels_of(*normalized);

  const CompiledPattern* best = nullptr;
  std::optional<SuffixMatch> best_match;
  for (const auto& pat : patterns_) {
    auto m = try_pattern(pat, labels);
    if (!m) continue;
    // Longest fixed tail wins; equal tails fall back to character count,
    // then to load order (earlier wins), so results never depend on
    // container iteration quirks.
    if (!best || pat.tail.size() > best->tail.size() ||
        (pat.tail.size() == best->tail.size() &&
         pat.fixed_chars > best->fixed_chars)) {
      best = &pat;
      best_match = std::move(m);
    }
  }
  return best_match;
}

std::optional<IpMatch> CloudCatalog::match_ip(const IpAddr& addr) const {
  const IpRange* hit = addr.is_v6
                           ? trie_lookup(trie_v6_, addr.bytes.data(), 128)
                           : trie_lookup(trie_v4_, addr.bytes.data(), 32);
  if (!hit) return std::nullopt;
  return IpMatch{hit->block, hit->provider, hit->tag, hit->service_kind};
}

namespace {

std::size_t parse_aws_feed(const json& doc, CloudCatalog* cat,
                           const std::string& provider, std::size_t* skipped) {
  std::size_t added = 0;
  auto consume = [&](const char* array_key, const char* prefix_key) {
    if (!doc.contains(array_key) || !doc[array_key].is_array()) return;
    for (const auto& entry : doc[array_key]) {
      if (!entry.is_object() || !entry.contains(prefix_key) ||
          !entry[prefix_key].is_string()) {
        ++*skipped;
        continue;
      }
      auto block = Cidr::parse(entry[prefix_key].get<std::string>());
      if (!block) {
        ++*skipped;
        continue;
      }
      std::string tag = entry.value("service", "");
      cat->add_range(IpRange{*block, provider, tag,
                             kind_from_feed_tag(provider, tag)},
                     skipped);
      ++added;
    }
  };
  consume("prefixes", "ip_prefix");
  consume("ipv6_prefixes", "ipv6_prefix");
  return added;
}

std::size_t parse_azure_feed(const json& doc, CloudCatalog* cat,
                             const std::string& provider,
                             std::size_t* skipped) {
  std::size_t added = 0;
  for (const auto& value : doc["values"]) {
    if (!value.is_object() || !value.contains("properties")) {
      ++*skipped;
      continue;
    }
    const auto& props = value["properties"];
    std::string tag = props.value("systemService", "");
    if (tag.empty()) tag = value.value("name", "");
    if (!props.contains("addressPrefixes") ||
        !props["addressPrefixes"].is_array()) {
      ++*skipped;
      continue;
    }
    for (const auto& prefix : props["addressPrefixes"]) {
      if (!prefix.is_string()) {
        ++*skipped;
        continue;
      }
      auto block = Cidr::parse(prefix.get<std::string>());
      if (!block) {
        ++*skipped;
        continue;
      }
      cat->add_range(IpRange{*block, provider, tag,
                             kind_from_feed_tag(provider, tag)},
                     skipped);
      ++added;
    }
  }
  return added;
}

std::size_t parse_google_feed(const json& doc, CloudCatalog* cat,
                              const std::string& provider,
                              std::size_t* skipped) {
  std::size_t added = 0;
  for (const auto& entry : doc["prefixes"]) {
    if (!entry.is_object()) {
      ++*skipped;
      continue;
    }
    std::string raw;
    if (entry.contains("ipv4Prefix") && entry["ipv4Prefix"].is_string())
      raw = entry["ipv4Prefix"].get<std::string>();
    else if (entry.contains("ipv6Prefix") && entry["ipv6Prefix"].is_string())
      raw = entry["ipv6Prefix"].get<std::string>();
    if (raw.empty()) {
      ++*skipped;
      continue;
    }
    auto block = Cidr::parse(raw);
    if (!block) {
      ++*skipped;
      continue;
    }
    std::string tag = entry.value("service", "");
    cat->add_range(IpRange{*block, provider, tag,
                           kind_from_feed_tag(provider, tag)},
                   skipped);
    ++added;
  }
  return added;
}

std::size_t parse_catalog_csv(const std::string& text, CloudCatalog* cat,
                              const std::string& source,
                              std::size_t* skipped) {
  std::size_t added = 0;
  bool first = true;
  for (const auto& raw_line : util::split(text, '\n')) {
    std::string line = util::trim(raw_line);
    if (line.empty() || line.starts_with('#')) continue;
    auto fields = util::csv_parse_line(line);
    if (first) {
      first = false;
      if (!fields.empty() && util::to_lower(fields[0]) == "provider")
        continue; // header row
    }
    if (fields.size() != 4) {
      ++*skipped;
      continue;
    }
    std::string provider = util::to_lower(util::trim(fields[0]));
    std::string kind_text = util::to_lower(util::trim(fields[1]));
    std::string pattern = util::trim(fields[2]);
    if (provider.empty() || pattern.empty()) {
      ++*skipped;
      continue;
    }

    // A CIDR in the pattern column declares an IP range row.
    if (pattern.find('/') != std::string::npos ||
        IpAddr::parse(pattern).has_value()) {
      auto block = Cidr::parse(pattern);
      if (!block) {
        ++*skipped;
        continue;
      }
      auto kind = service_kind_from(kind_text);
      cat->add_range(IpRange{*block, provider, kind_text,
                             kind.value_or(ServiceKind::unknown)},
                     skipped);
      ++added;
      continue;
    }

    auto kind = service_kind_from(kind_text);
    bool nameable = false;
    if (!kind || !parse_bool_field(fields[3], &nameable)) {
      ++*skipped;
      continue;
    }
    std::size_t before = cat->services().size();
    cat->add_service(CloudService{provider, *kind, pattern, nameable}, skipped);
    if (cat->services().size() > before) ++added;
  }
  (void)source;
  return added;
}

} // namespace

CloudCatalog builtin_catalog() {
  CloudCatalog cat;
  for (const auto& row : kBuiltinSuffixes) {
    cat.add_service(
        CloudService{row.provider, row.kind, row.pattern, row.user_nameable},
        nullptr);
  }
  cat.index_ranges();
  return cat;
}

CloudCatalog load_provider_ranges(
    const std::map<std::string, std::string>& feed_documents) {
  if (feed_documents.empty())
    throw EmptyFeedError("no feed documents supplied");

  CloudCatalog cat = builtin_catalog();

  for (const auto& [provider, text] : feed_documents) {
    std::size_t* skipped = &cat.skipped_[provider];
    std::size_t added = 0;

    json doc = json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
      if (doc.contains("values") && doc["values"].is_array()) {
        added = parse_azure_feed(doc, &cat, provider, skipped);
        if (doc.contains("changeNumber"))
          cat.feed_timestamps_[provider] = doc["changeNumber"].dump();
      } else if (doc.contains("prefixes") && doc["prefixes"].is_array() &&
                 !doc["prefixes"].empty() &&
                 (doc["prefixes"][0].contains("ipv4Prefix") ||
                  doc["prefixes"][0].contains("ipv6Prefix"))) {
        added = parse_google_feed(doc, &cat, provider, skipped);
        if (doc.contains("creationTime") && doc["creationTime"].is_string())
          cat.feed_timestamps_[provider] = doc["creationTime"].get<std::string>();
      } else if (doc.contains("prefixes") || doc.contains("ipv6_prefixes")) {
        added = parse_aws_feed(doc, &cat, provider, skipped);
        if (doc.contains("createDate") && doc["createDate"].is_string())
          cat.feed_timestamps_[provider] = doc["createDate"].get<std::string>();
      } else {
        throw FeedFormatError(provider, "JSON document matches no known feed shape");
      }
    } else {
      // Not JSON: must be the normalized catalog CSV.
      if (text.find(',') == std::string::npos)
        throw FeedFormatError(provider, "document is neither feed JSON nor catalog CSV");
      added = parse_catalog_csv(text, &cat, provider, skipped);
    }

    if (added == 0)
      throw EmptyFeedError("feed for '" + provider + "' contained no usable entries");
  }

  cat.index_ranges();
  return cat;
}

} // namespace dsentinel::catalog
