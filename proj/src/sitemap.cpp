#include "dsentinel/sitemap.hpp"

#include "dsentinel/html.hpp"
#include "dsentinel/util.hpp"

#include <cctype>

namespace dsentinel::sitemap {

namespace {

constexpr std::size_t kMaxSamples = 100;
constexpr int kMaxDepth = 2;

struct Accumulator {
  Stats stats;
  double entropy_sum = 0.0;
  std::uint64_t entropy_n = 0;

  void add_url(const std::string& url) {
    ++stats.url_count;
    if (stats.sample_urls.size() < kMaxSamples) stats.sample_urls.push_back(url);
    entropy_sum += util::char_entropy(url_path(url));
    ++entropy_n;
  }
};

// Case-insensitive match of `tag` at doc[i..] where doc[i]=='<'; the name
// must end at whitespace, '>' or '/'.
bool tag_at(std::string_view doc, std::size_t i, std::string_view tag) {
  if (i + 1 + tag.size() > doc.size()) return false;
  for (std::size_t k = 0; k < tag.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(doc[i + 1 + k])) !=
        std::tolower(static_cast<unsigned char>(tag[k])))
      return false;
  }
  std::size_t after = i + 1 + tag.size();
  if (after >= doc.size()) return true;
  char c = doc[after];
  return c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c));
}

std::string resolve_child_url(const std::string& loc,
                              const std::string& base_url) {
  if (loc.rfind("http://", 0) == 0 || loc.rfind("https://", 0) == 0)
    return loc;
  if (!loc.empty() && loc[0] == '/') {
    // Root-relative: keep scheme://host of the base.
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) return loc;
    auto host_end = base_url.find('/', scheme_end + 3);
    return base_url.substr(0, host_end == std::string::npos ? base_url.size()
                                                            : host_end) +
           loc;
  }
  return loc;
}

void scan(std::string_view doc, const std::string& base_url,
          const Fetcher& fetch, int depth, Accumulator& acc);

// Handles one <sitemap><loc>…</loc> entry of a sitemap index.
void handle_child_loc(const std::string& loc, const std::string& base_url,
                      const Fetcher& fetch, int depth, Accumulator& acc) {
  std::string child_url = resolve_child_url(loc, base_url);
  if (fetch && depth < kMaxDepth) {
    if (auto child = fetch(child_url)) {
      scan(*child, child_url, fetch, depth + 1, acc);
      return;
    }
  }
  // Counted but not expanded: one entry stands in for the child map.
  acc.add_url(child_url);
  ++acc.stats.unexpanded_children;
}

void scan(std::string_view doc, const std::string& base_url,
          const Fetcher& fetch, int depth, Accumulator& acc) {
  acc.stats.total_size_bytes += doc.size();

  bool root_seen = false;
  bool root_is_index = false;
  bool in_url = false;     // inside a <url> element
  bool in_sitemap = false; // inside a <sitemap> element (index child)

  std::size_t i = 0;
  while (i < doc.size()) {
    if (doc[i] != '<') {
      auto next = doc.find('<', i);
      i = next == std::string_view::npos ? doc.size() : next;
      continue;
    }
    if (doc.compare(i, 4, "<!--") == 0) {
      auto end = doc.find("-->", i + 4);
      i = end == std::string_view::npos ? doc.size() : end + 3;
      continue;
    }
    if (i + 1 < doc.size() && (doc[i + 1] == '?' || doc[i + 1] == '!')) {
      auto end = doc.find('>', i);
      i = end == std::string_view::npos ? doc.size() : end + 1;
      continue;
    }

    if (!root_seen) {
      if (tag_at(doc, i, "urlset")) {
        root_seen = true;
      } else if (tag_at(doc, i, "sitemapindex")) {
        root_seen = true;
        root_is_index = true;
      } else {
        // First element is something else entirely: not a sitemap.
        return;
      }
      if (depth == 0) {
        acc.stats.well_formed = true;
        acc.stats.is_index = root_is_index;
      }
      auto end = doc.find('>', i);
      i = end == std::string_view::npos ? doc.size() : end + 1;
      continue;
    }

    if (tag_at(doc, i, "url")) {
      in_url = true;
      ++acc.stats.url_count;
    } else if (tag_at(doc, i, "/url")) {
      in_url = false;
    } else if (tag_at(doc, i, "sitemap")) {
      in_sitemap = true;
    } else if (tag_at(doc, i, "/sitemap")) {
      in_sitemap = false;
    } else if (tag_at(doc, i, "loc") && (in_url || in_sitemap)) {
      auto open_end = doc.find('>', i);
      if (open_end == std::string_view::npos) break;
      auto close = doc.find("</", open_end);
      if (close == std::string_view::npos) break;
      std::string loc = util::trim(
          html::decode_entities(doc.substr(open_end + 1, close - open_end - 1)));
      if (!loc.empty()) {
        if (in_url) {
          // The <url> itself was already counted; the loc feeds the
          // sample list and the entropy mean.
          if (acc.stats.sample_urls.size() < kMaxSamples)
            acc.stats.sample_urls.push_back(loc);
          acc.entropy_sum += util::char_entropy(url_path(loc));
          ++acc.entropy_n;
        } else {
          handle_child_loc(loc, base_url, fetch, depth, acc);
        }
      }
      i = close;
      continue;
    }

    auto end = doc.find('>', i);
    i = end == std::string_view::npos ? doc.size() : end + 1;
  }
}

} // namespace

std::string url_path(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::string(url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return "/";
  return std::string(url.substr(path_start));
}

Stats parse(std::string_view document, const std::string& base_url,
            const Fetcher& fetch) {
  Accumulator acc;
  scan(document, base_url, fetch, 0, acc);
  if (!acc.stats.well_formed) {
    // Non-XML degrades to flagged zero-count stats; the size still
    // reflects what was examined.
    Stats out;
    out.total_size_bytes = document.size();
    return out;
  }
  if (acc.entropy_n > 0)
    acc.stats.name_entropy =
        acc.entropy_sum / static_cast<double>(acc.entropy_n);
  return acc.stats;
}

} // namespace dsentinel::sitemap
