// Streaming sitemap scanner. Abusive sitemaps run to six figures of URLs,
// so the scan is a single pass that keeps counters, a bounded sample, and
// a running entropy sum — never the document tree.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsentinel::sitemap {

struct Stats {
  std::uint64_t url_count = 0;
  std::uint64_t total_size_bytes = 0;
  std::vector<std::string> sample_urls;   // first 100 URLs seen
  double name_entropy = 0.0;              // mean per-URL-path entropy, bits/char
  bool well_formed = false;               // false when input isn't sitemap XML
  bool is_index = false;                  // root element was <sitemapindex>
  std::uint32_t unexpanded_children = 0;  // child maps counted without fetching

  bool operator==(const Stats&) const = default;
};

// Retrieves a child sitemap by URL; nullopt when unreachable. The caller's
// fetcher is responsible for charging its own request budget.
using Fetcher =
    std::function<std::optional<std::string>(const std::string& url)>;

// Scans `document`. A <sitemapindex> recurses through `fetch` up to two
// levels deep when one is provided; without a fetcher each child map
// counts as one URL and is flagged unexpanded. Anything that is not
// sitemap XML degrades to a zero-count Stats with well_formed=false.
Stats parse(std::string_view document, const std::string& base_url,
            const Fetcher& fetch = nullptr);

// The path component of a URL ("https://h/x/y?z" -> "/x/y?z"); input
// without a scheme is returned as-is. Entropy is computed over this.
std::string url_path(std::string_view url);

} // namespace dsentinel::sitemap
