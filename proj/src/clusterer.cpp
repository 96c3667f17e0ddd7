#include "dsentinel/clusterer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "dsentinel/html.hpp"
#include "dsentinel/ip.hpp"
#include "dsentinel/util.hpp"

namespace dsentinel::clusterer {

namespace {

// ---------------------------------------------------------------------------
// Dialing prefixes (ITU E.164 assignments), grouped by length. Each array is
// sorted so longest-prefix lookup can binary-search.

constexpr std::string_view kCodes1[] = {"1", "7"};

constexpr std::string_view kCodes2[] = {
    "20", "27", "30", "31", "32", "33", "34", "36", "39", "40", "41", "43",
    "44", "45", "46", "47", "48", "49", "51", "52", "53", "54", "55", "56",
    "57", "58", "60", "61", "62", "63", "64", "65", "66", "81", "82", "84",
    "86", "90", "91", "92", "93", "94", "95", "98"};

constexpr std::string_view kCodes3[] = {
    "211", "212", "213", "216", "218", "220", "221", "222", "223", "224",
    "225", "226", "227", "228", "229", "230", "231", "232", "233", "234",
    "235", "236", "237", "238", "239", "240", "241", "242", "243", "244",
    "245", "246", "247", "248", "249", "250", "251", "252", "253", "254",
    "255", "256", "257", "258", "260", "261", "262", "263", "264", "265",
    "266", "267", "268", "269", "290", "291", "297", "298", "299", "350",
    "351", "352", "353", "354", "355", "356", "357", "358", "359", "370",
    "371", "372", "373", "374", "375", "376", "377", "378", "379", "380",
    "381", "382", "383", "385", "386", "387", "389", "420", "421", "423",
    "500", "501", "502", "503", "504", "505", "506", "507", "508", "509",
    "590", "591", "592", "593", "594", "595", "596", "597", "598", "599",
    "670", "672", "673", "674", "675", "676", "677", "678", "679", "680",
    "681", "682", "683", "685", "686", "687", "688", "689", "690", "691",
    "692", "850", "852", "853", "855", "856", "870", "880", "886", "960",
    "961", "962", "963", "964", "965", "966", "967", "968", "970", "971",
    "972", "973", "974", "975", "976", "977", "992", "993", "994", "995",
    "996", "998"};

template <std::size_t N>
bool prefix_assigned(const std::string_view (&table)[N], std::string_view p) {
  return std::binary_search(std::begin(table), std::end(table), p);
}

// ---------------------------------------------------------------------------
// Tiny URL reader: enough structure to pull host, path segments, and query
// parameters out of an href. Tolerant by design — attackers' markup is not.

struct Url {
  std::string scheme;  // lowercased; empty for scheme-relative "//host/…"
  std::string host;    // lowercased, no port, no brackets, no trailing dot
  std::string path;    // as written, starting with '/' (or empty)
  std::string query;   // without the '?'
};

bool scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
         c == '.';
}

std::optional<Url> parse_url(std::string_view raw) {
  std::string_view s = raw;
  Url url;

  // Optional scheme.
  std::size_t colon = 0;
  while (colon < s.size() && scheme_char(s[colon])) ++colon;
  if (colon > 0 && colon < s.size() && s[colon] == ':' &&
      std::isalpha(static_cast<unsigned char>(s[0]))) {
    url.scheme = util::to_lower(s.substr(0, colon));
    s.remove_prefix(colon + 1);
  }

  // Authority is mandatory for our purposes: bare-path hrefs point back at
  // the page's own host.
  if (!s.starts_with("//")) return std::nullopt;
  s.remove_prefix(2);

  auto authority_end = s.find_first_of("/?#");
  std::string_view authority = s.substr(0, authority_end);
  std::string_view rest =
      authority_end == std::string_view::npos ? std::string_view{} : s.substr(authority_end);

  // Drop userinfo.
  if (auto at = authority.rfind('@'); at != std::string_view::npos)
    authority = authority.substr(at + 1);

  std::string_view host = authority;
  if (host.starts_with('[')) {
    auto close = host.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = host.substr(1, close - 1);
  } else if (auto port = host.rfind(':'); port != std::string_view::npos) {
    std::string_view tail = host.substr(port + 1);
    if (!tail.empty() &&
        std::all_of(tail.begin(), tail.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        }))
      host = host.substr(0, port);
  }
  while (host.ends_with('.')) host.remove_suffix(1);
  if (host.empty()) return std::nullopt;
  url.host = util::to_lower(host);

  // Split the remainder into path, query; drop any fragment.
  if (auto frag = rest.find('#'); frag != std::string_view::npos)
    rest = rest.substr(0, frag);
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    url.path = std::string(rest.substr(0, q));
    url.query = std::string(rest.substr(q + 1));
  } else {
    url.path = std::string(rest);
  }
  return url;
}

std::string url_decode(std::string_view s, bool plus_as_space) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() &&
        std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      auto hex = [](char c) {
        if (c >= '0' && c <= '9') return c - '0';
        return (c >= 'a' ? c - 'a' : c - 'A') + 10;
      };
      out.push_back(static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2])));
      i += 2;
    } else if (s[i] == '+' && plus_as_space) {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::optional<std::string> query_param(std::string_view query,
                                       std::string_view name) {
  std::size_t pos = 0;
  while (pos <= query.size()) {
    auto amp = query.find('&', pos);
    std::string_view pair = query.substr(
        pos, amp == std::string_view::npos ? std::string_view::npos : amp - pos);
    auto eq = pair.find('=');
    std::string_view key = eq == std::string_view::npos ? pair : pair.substr(0, eq);
    if (url_decode(key, true) == name)
      return url_decode(eq == std::string_view::npos ? std::string_view{}
                                                     : pair.substr(eq + 1),
                        true);
    if (amp == std::string_view::npos) break;
    pos = amp + 1;
  }
  return std::nullopt;
}

std::string_view strip_www(std::string_view host) {
  if (host.starts_with("www.")) host.remove_prefix(4);
  return host;
}

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t start = i;
    while (i < path.size() && path[i] != '/') ++i;
    if (i > start) out.push_back(url_decode(path.substr(start, i - start), false));
  }
  return out;
}

bool valid_handle(std::string_view h, std::string_view extra, std::size_t min_len,
                  std::size_t max_len) {
  if (h.size() < min_len || h.size() > max_len) return false;
  return std::all_of(h.begin(), h.end(), [&](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) ||
           extra.find(c) != std::string_view::npos;
  });
}

std::string lower_handle(std::string_view seg) {
  std::string_view h = seg;
  if (h.starts_with('@')) h.remove_prefix(1);
  return util::to_lower(h);
}

bool in_list(std::string_view needle, std::initializer_list<std::string_view> hay) {
  return std::find(hay.begin(), hay.end(), needle) != hay.end();
}

// ---------------------------------------------------------------------------
// Distance core, shared by identifier_distance and the clustering.

std::size_t intersection_size(const std::set<std::string>& a,
                              const std::set<std::string>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t n = 0;
  for (const auto& x : small) n += large.contains(x);
  return n;
}

double set_distance(const std::set<std::string>& a,
                    const std::set<std::string>& b) {
  std::size_t inter = intersection_size(a, b);
  std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

// ---------------------------------------------------------------------------
// Identifiers

std::string to_string(IdentifierKind kind) {
  switch (kind) {
    case IdentifierKind::phone: return "phone";
    case IdentifierKind::chat_handle: return "chat_handle";
    case IdentifierKind::social_account: return "social_account";
    case IdentifierKind::shortener_url: return "shortener_url";
    case IdentifierKind::ip_address: return "ip_address";
  }
  return "unknown";
}

std::optional<std::string> phone_country_code(std::string_view digits) {
  if (digits.size() >= 3 && prefix_assigned(kCodes3, digits.substr(0, 3)))
    return std::string(digits.substr(0, 3));
  if (digits.size() >= 2 && prefix_assigned(kCodes2, digits.substr(0, 2)))
    return std::string(digits.substr(0, 2));
  if (digits.size() >= 1 && prefix_assigned(kCodes1, digits.substr(0, 1)))
    return std::string(digits.substr(0, 1));
  return std::nullopt;
}

Identifier normalized(const Identifier& id) {
  Identifier out = id;
  switch (id.kind) {
    case IdentifierKind::phone: {
      std::string digits;
      for (char c : id.value)
        if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
      out.value = digits;
      out.country_code = phone_country_code(digits);
      break;
    }
    case IdentifierKind::chat_handle:
    case IdentifierKind::social_account:
      out.value = util::to_lower(id.value);
      out.country_code.reset();
      break;
    case IdentifierKind::shortener_url: {
      // Lowercase the host part only; shortener codes are case-sensitive.
      auto slash = id.value.find('/');
      if (slash == std::string::npos) {
        out.value = util::to_lower(id.value);
      } else {
        out.value = util::to_lower(id.value.substr(0, slash)) +
                    id.value.substr(slash);
      }
      while (out.value.ends_with('/')) out.value.pop_back();
      out.country_code.reset();
      break;
    }
    case IdentifierKind::ip_address: {
      if (auto addr = IpAddr::parse(id.value))
        out.value = addr->to_string();
      else
        out.value = util::to_lower(id.value);
      out.country_code.reset();
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

const std::set<std::string>& default_shortener_hosts() {
  static const std::set<std::string> hosts = {
      "bit.ly",      "tinyurl.com", "goo.gl",      "t.co",       "is.gd",
      "ow.ly",       "buff.ly",     "cutt.ly",     "rebrand.ly", "rb.gy",
      "tiny.cc",     "v.gd",        "shorturl.at", "s.id",       "bl.ink",
      "lnkd.in",     "soo.gd",      "bitly.com",   "trib.al",    "shorte.st",
  };
  return hosts;
}

std::set<std::string> parse_host_list(std::string_view text) {
  std::set<std::string> hosts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::string host = util::to_lower(util::trim(line));
    if (!host.empty()) hosts.insert(std::string(strip_www(host)));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return hosts;
}

std::vector<Extraction> extract_identifiers(std::string_view html_text,
                                            std::string_view source_fqdn,
                                            const ExtractOptions& options,
                                            ExtractStats* stats) {
  const std::set<std::string>& shorteners =
      options.shortener_hosts ? *options.shortener_hosts
                              : default_shortener_hosts();
  const std::string fqdn = util::normalize_fqdn(source_fqdn);

  ExtractStats local;
  std::vector<Extraction> out;
  std::set<Identifier> seen;

  auto emit = [&](Identifier id) {
    if (seen.insert(id).second) out.push_back({std::move(id), fqdn});
  };

  auto push_phone = [&](std::string_view text) {
    std::string digits;
    for (char c : text)
      if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    if (digits.size() < 7 || digits.size() > 15) {
      ++local.malformed;
      return;
    }
    Identifier id{IdentifierKind::phone, digits, phone_country_code(digits)};
    emit(std::move(id));
  };

  auto handle_href = [&](const std::string& raw) {
    ++local.hrefs;
    auto url = parse_url(html::decode_entities(util::trim(raw)));
    if (!url) return;
    if (!url->scheme.empty() && url->scheme != "http" && url->scheme != "https")
      return;

    std::string host(strip_www(url->host));
    auto segs = path_segments(url->path);

    // WhatsApp deep links carry a phone number in the path or the phone=
    // query parameter.
    if (host == "wa.me") {
      if (!segs.empty() && segs[0] == "send") {
        if (auto phone = query_param(url->query, "phone"))
          push_phone(*phone);
        else
          ++local.malformed;
      } else if (!segs.empty() && segs[0] == "message") {
        ++local.malformed;  // keyed business short link, no number inside
      } else if (!segs.empty()) {
        push_phone(segs[0]);
      } else if (auto phone = query_param(url->query, "phone")) {
        push_phone(*phone);
      } else {
        ++local.malformed;
      }
      return;
    }
    if (host == "whatsapp.com" || host == "api.whatsapp.com" ||
        host == "web.whatsapp.com") {
      if (auto phone = query_param(url->query, "phone"))
        push_phone(*phone);
      else
        ++local.malformed;
      return;
    }

    // Telegram: public handles, invite links, new-style "+key" invites.
    if (host == "t.me" || host == "telegram.me" || host == "telegram.dog") {
      if (segs.empty()) {
        ++local.malformed;
        return;
      }
      std::string_view first = segs[0];
      if (first == "joinchat" || first == "s") {
        if (segs.size() < 2) {
          ++local.malformed;
          return;
        }
        if (first == "joinchat") {
          emit({IdentifierKind::chat_handle,
                "telegram:joinchat/" + util::to_lower(segs[1]), std::nullopt});
        } else {
          std::string h = lower_handle(segs[1]);
          if (valid_handle(h, "_", 3, 32))
            emit({IdentifierKind::chat_handle, "telegram:" + h, std::nullopt});
          else
            ++local.malformed;
        }
        return;
      }
      if (first.starts_with('+')) {
        std::string key(first.substr(1));
        if (key.empty()) {
          ++local.malformed;
          return;
        }
        emit({IdentifierKind::chat_handle,
              "telegram:joinchat/" + util::to_lower(key), std::nullopt});
        return;
      }
      if (in_list(first, {"share", "proxy", "socks", "iv", "login"})) return;
      std::string h = lower_handle(first);
      if (valid_handle(h, "_", 3, 32))
        emit({IdentifierKind::chat_handle, "telegram:" + h, std::nullopt});
      else
        ++local.malformed;
      return;
    }

    // Twitter / X.
    if (host == "twitter.com" || host == "mobile.twitter.com" || host == "x.com") {
      if (segs.empty()) return;
      if (in_list(segs[0],
                  {"share", "intent", "home", "search", "hashtag", "i",
                   "settings", "login", "signup", "tos", "privacy", "explore",
                   "notifications", "messages", "about", "download"}))
        return;
      std::string h = lower_handle(segs[0]);
      if (valid_handle(h, "_", 1, 15))
        emit({IdentifierKind::social_account, "twitter:" + h, std::nullopt});
      else
        ++local.malformed;
      return;
    }

    // Instagram.
    if (host == "instagram.com" || host == "instagr.am") {
      if (segs.empty()) return;
      if (in_list(segs[0], {"p", "reel", "reels", "tv", "stories", "explore",
                            "accounts", "about", "legal", "directory",
                            "developer", "web"}))
        return;
      std::string h = lower_handle(segs[0]);
      if (valid_handle(h, "._", 1, 30))
        emit({IdentifierKind::social_account, "instagram:" + h, std::nullopt});
      else
        ++local.malformed;
      return;
    }

    // Facebook: vanity handles, numeric profiles, groups, pages.
    if (host == "facebook.com" || host == "m.facebook.com" ||
        host == "web.facebook.com" || host == "fb.com" || host == "fb.me") {
      if (segs.empty()) return;
      std::string_view first = segs[0];
      if (first == "profile.php") {
        auto id_param = query_param(url->query, "id");
        if (id_param && !id_param->empty() &&
            std::all_of(id_param->begin(), id_param->end(), [](char c) {
              return std::isdigit(static_cast<unsigned char>(c));
            })) {
          emit({IdentifierKind::social_account, "facebook:" + *id_param,
                std::nullopt});
        } else {
          ++local.malformed;
        }
        return;
      }
      if (first == "groups") {
        if (segs.size() < 2) {
          ++local.malformed;
          return;
        }
        emit({IdentifierKind::social_account,
              "facebook:groups/" + util::to_lower(segs[1]), std::nullopt});
        return;
      }
      if (first == "people" || first == "pages") {
        // The trailing numeric segment is the account id.
        for (auto it = segs.rbegin(); it != segs.rend() - 1; ++it) {
          if (!it->empty() && std::all_of(it->begin(), it->end(), [](char c) {
                return std::isdigit(static_cast<unsigned char>(c));
              })) {
            emit({IdentifierKind::social_account, "facebook:" + *it,
                  std::nullopt});
            return;
          }
        }
        ++local.malformed;
        return;
      }
      if (in_list(first, {"sharer", "sharer.php", "share", "share.php",
                          "login.php", "login", "dialog", "plugins", "watch",
                          "events", "marketplace", "hashtag", "help",
                          "privacy", "policies", "legal", "reel", "stories",
                          "story.php", "photo.php"}))
        return;
      std::string h = lower_handle(first);
      if (valid_handle(h, ".-", 1, 64))
        emit({IdentifierKind::social_account, "facebook:" + h, std::nullopt});
      else
        ++local.malformed;
      return;
    }

    // URL shorteners: host match from the configured list; the value keeps
    // the short code's case.
    if (shorteners.contains(host)) {
      std::string path = url->path;
      while (path.ends_with('/')) path.pop_back();
      bool has_code = std::any_of(path.begin(), path.end(),
                                  [](char c) { return c != '/'; });
      if (!has_code) {
        ++local.malformed;  // shortener homepage, nothing forwarded
        return;
      }
      emit({IdentifierKind::shortener_url, host + path, std::nullopt});
      return;
    }

    // Raw IP hosts.
    if (auto addr = IpAddr::parse(host)) {
      emit({IdentifierKind::ip_address, addr->to_string(), std::nullopt});
      return;
    }
  };

  auto scan = html::scan(html_text);
  for (const auto& href : scan.link_hrefs) handle_href(href);
  for (const auto& anchor : scan.anchors)
    if (!anchor.href.empty()) handle_href(anchor.href);

  if (stats) *stats = local;
  return out;
}

// ---------------------------------------------------------------------------
// Co-occurrence graph

IdentifierGraph build_graph(const std::vector<Extraction>& extractions) {
  IdentifierGraph g;
  for (const auto& e : extractions) g.nodes[e.identifier].insert(e.fqdn);

  // Count shared domains pairwise: every domain contributes one unit to each
  // pair of identifiers seen on it.
  std::map<std::string, std::vector<const Identifier*>> by_domain;
  for (const auto& [id, domains] : g.nodes)
    for (const auto& d : domains) by_domain[d].push_back(&id);

  for (const auto& [domain, ids] : by_domain) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        ++g.edges[{*ids[i], *ids[j]}];
  }
  return g;
}

double identifier_distance(const Identifier& u, const Identifier& v,
                           const IdentifierGraph& graph) {
  auto iu = graph.nodes.find(u);
  auto iv = graph.nodes.find(v);
  if (iu == graph.nodes.end() || iv == graph.nodes.end())
    throw InputError("identifier_distance: identifier not in graph: " +
                     to_string((iu == graph.nodes.end() ? u : v).kind) + " " +
                     (iu == graph.nodes.end() ? u : v).value);
  return set_distance(iu->second, iv->second);
}

// ---------------------------------------------------------------------------
// Hierarchical clustering

std::string to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::single: return "single";
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
  }
  return "unknown";
}

Linkage linkage_from(std::string_view name) {
  if (name == "single") return Linkage::single;
  if (name == "average") return Linkage::average;
  if (name == "complete") return Linkage::complete;
  throw InputError("unknown linkage \"" + std::string(name) +
                   "\" (expected single, average, or complete)");
}

ClusterResult hierarchical_cluster(const IdentifierGraph& graph, double cutoff,
                                   Linkage linkage) {
  if (graph.nodes.empty())
    throw InputError("hierarchical_cluster: empty identifier graph");
  if (!(cutoff >= 0.0 && cutoff <= 1.0))
    throw InputError("hierarchical_cluster: cutoff must be within [0, 1]");

  // Index nodes; map order gives the Identifier total order, so index order
  // doubles as the tie-break order.
  std::vector<const Identifier*> ids;
  std::vector<const std::set<std::string>*> domains;
  std::map<Identifier, std::size_t> index;
  for (const auto& [id, ds] : graph.nodes) {
    index.emplace(id, ids.size());
    ids.push_back(&id);
    domains.push_back(&ds);
  }
  const std::size_t n = ids.size();

  // Identifiers sharing no domain sit at distance 1, which no merge below a
  // cutoff ≤ 1 can bridge, so each positive-weight component clusters
  // independently. Union-find with the smallest index as the root keeps the
  // component order deterministic.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [pair, weight] : graph.edges) {
    (void)weight;
    std::size_t a = find(index.at(pair.first));
    std::size_t b = find(index.at(pair.second));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) components[find(i)].push_back(i);

  struct PendingMerge {
    double distance;
    std::vector<std::size_t> members;  // global indices, sorted
  };
  std::vector<PendingMerge> merges;
  std::vector<std::vector<std::size_t>> final_groups;

  for (const auto& [root, comp] : components) {
    (void)root;
    if (comp.size() == 1) {
      final_groups.push_back(comp);
      continue;
    }

    // Base distances between the component's members, indexed locally.
    const std::size_t m = comp.size();
    std::map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < m; ++i) local.emplace(comp[i], i);
    std::vector<double> base(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        double d = set_distance(*domains[comp[i]], *domains[comp[j]]);
        base[i * m + j] = d;
        base[j * m + i] = d;
      }

    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i : comp) groups.push_back({i});
    std::vector<bool> alive(groups.size(), true);

    // Linkage distance between two groups. The average sums the base
    // distances in one canonical order — smaller-fronted group outermost —
    // so a given pair of member sets always yields the bit-identical value
    // no matter how the groups were assembled.
    auto group_distance = [&](const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
      const auto& outer = a.front() < b.front() ? a : b;
      const auto& inner = a.front() < b.front() ? b : a;
      double acc = linkage == Linkage::single
                       ? std::numeric_limits<double>::infinity()
                       : 0.0;
      for (std::size_t u : outer)
        for (std::size_t v : inner) {
          double d = base[local.at(u) * m + local.at(v)];
          switch (linkage) {
            case Linkage::single: acc = std::min(acc, d); break;
            case Linkage::complete: acc = std::max(acc, d); break;
            case Linkage::average: acc += d; break;
          }
        }
      if (linkage == Linkage::average)
        acc /= static_cast<double>(outer.size()) * static_cast<double>(inner.size());
      return acc;
    };

    while (true) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_a = groups.size(), best_b = groups.size();
      std::pair<std::size_t, std::size_t> best_key{n, n};
      for (std::size_t a = 0; a < groups.size(); ++a) {
        if (!alive[a]) continue;
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
          if (!alive[b]) continue;
          double d = group_distance(groups[a], groups[b]);
          std::pair<std::size_t, std::size_t> key{
              std::min(groups[a].front(), groups[b].front()),
              std::max(groups[a].front(), groups[b].front())};
          if (d < best || (d == best && key < best_key)) {
            best = d;
            best_a = a;
            best_b = b;
            best_key = key;
          }
        }
      }
      if (best_a == groups.size() || best >= cutoff) break;

      std::vector<std::size_t> merged;
      std::merge(groups[best_a].begin(), groups[best_a].end(),
                 groups[best_b].begin(), groups[best_b].end(),
                 std::back_inserter(merged));
      merges.push_back({best, merged});
      alive[best_b] = false;
      groups[best_a] = std::move(merged);
    }

    for (std::size_t a = 0; a < groups.size(); ++a)
      if (alive[a]) final_groups.push_back(std::move(groups[a]));
  }

  // Merges across components are independent; present them globally in
  // distance order, ties by smallest member, preserving per-component order.
  std::stable_sort(merges.begin(), merges.end(),
                   [](const PendingMerge& x, const PendingMerge& y) {
                     if (x.distance != y.distance) return x.distance < y.distance;
                     return x.members.front() < y.members.front();
                   });

  std::sort(final_groups.begin(), final_groups.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });

  ClusterResult result;
  result.cutoff = cutoff;
  result.linkage = linkage;
  for (const auto& group : final_groups) {
    Cluster c;
    for (std::size_t i : group) {
      c.members.push_back(*ids[i]);
      c.domains.insert(domains[i]->begin(), domains[i]->end());
    }
    result.clusters.push_back(std::move(c));
  }
  std::size_t step = 0;
  for (const auto& pm : merges) {
    MergeStep ms;
    ms.step = ++step;
    ms.distance = pm.distance;
    for (std::size_t i : pm.members) ms.members.push_back(*ids[i]);
    result.merges.push_back(std::move(ms));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reporting

std::vector<ClusterStat> cluster_stats(const ClusterResult& result) {
  std::vector<ClusterStat> stats;
  stats.reserve(result.clusters.size());
  for (std::size_t i = 0; i < result.clusters.size(); ++i)
    stats.push_back({i, result.clusters[i].members.size(),
                     result.clusters[i].domains.size()});
  std::stable_sort(stats.begin(), stats.end(),
                   [](const ClusterStat& a, const ClusterStat& b) {
                     if (a.domain_count != b.domain_count)
                       return a.domain_count > b.domain_count;
                     return a.identifier_count > b.identifier_count;
                   });
  return stats;
}

std::string export_graph_json_lines(const IdentifierGraph& graph) {
  std::string out;
  for (const auto& [id, domains] : graph.nodes) {
    nlohmann::json j{{"type", "node"},
                     {"kind", to_string(id.kind)},
                     {"value", id.value},
                     {"domains", domains},
                     {"domain_count", domains.size()}};
    if (id.country_code) j["country_code"] = *id.country_code;
    out += j.dump();
    out += '\n';
  }
  for (const auto& [pair, weight] : graph.edges) {
    nlohmann::json j{
        {"type", "edge"},
        {"a", {{"kind", to_string(pair.first.kind)}, {"value", pair.first.value}}},
        {"b", {{"kind", to_string(pair.second.kind)}, {"value", pair.second.value}}},
        {"shared_domains", weight}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string export_dendrogram_csv(const ClusterResult& result) {
  std::string out = "step,distance,member_count,members\n";
  for (const auto& merge : result.merges) {
    char distance[32];
    std::snprintf(distance, sizeof distance, "%.12g", merge.distance);
    std::string members;
    for (const auto& id : merge.members) {
      if (!members.empty()) members += ' ';
      members += to_string(id.kind);
      members += ':';
      members += id.value;
    }
    out += util::csv_row({std::to_string(merge.step), distance,
                          std::to_string(merge.members.size()), members});
    out += '\n';
  }
  return out;
}

} // namespace dsentinel::clusterer
