// Keyword extraction from HTML and the content analyses built on it:
// topic classification, exact-keyword clustering, and the registrar-span
// filter that separates coordinated hijack content from parked-domain noise.
#pragma once

#include "dsentinel/util.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dsentinel::keywords {

// Tokenization knobs. Keywords are drawn from the fields humans and search
// engines read: title, meta keywords/description, headings, anchor text.
struct ExtractOptions {
  std::size_t max_ngram = 3;
  // Tokens dropped before n-grams are formed. Defaults to a small
  // function-word list; see default_stopwords().
  const std::set<std::string>* stopwords = nullptr;
};

const std::set<std::string>& default_stopwords();

// Lowercased terms in document order, deduplicated. Within each source unit
// (the title, one comma-separated meta-keyword segment, one heading, one
// anchor) consecutive surviving tokens also form n-grams up to max_ngram;
// n-grams never cross unit boundaries.
std::vector<std::string> extract_keywords(const std::string& html,
                                          const ExtractOptions& options = {});

// Adapter for snapshot diffing: a callable with the KeywordExtractor shape.
std::vector<std::string> extract_keywords_simple(const std::string& html);

enum class Topic {
  gambling,
  adult,
  seo_spam,
  pharma,
  japanese_keyword_hack,
  other,
};

std::string_view to_string(Topic topic);

struct TopicScore {
  Topic topic = Topic::other;
  double score = 0.0; // weighted lexicon hits backing the verdict
};

// Page facts that are not keywords but steer classification: a Japanese
// page hiding behind a huge generated sitemap is its own category even
// when no lexicon term matches.
struct PageContext {
  std::optional<std::string> language;          // BCP-47-ish, from detection
  std::optional<std::uint64_t> sitemap_urls;    // URL count if a sitemap exists
};

// Weighted lexicon vote over the topic vocabularies. Multi-word lexicon
// entries weigh more (they are more specific). Nothing matched -> other.
TopicScore classify_content(const std::vector<std::string>& keywords,
                            const PageContext& context = {});

// --- clustering ----------------------------------------------------------

struct Page {
  std::string id; // typically the fqdn
  std::vector<std::string> keywords;
};

// Partition by exact keyword-set equality (order and duplicates ignored).
// Clusters appear in first-seen order; members keep input order.
std::vector<std::vector<std::string>> cluster_by_keywords(
    const std::vector<Page>& pages);

// --- registrar span ------------------------------------------------------

struct ClusterSpan {
  std::vector<std::string> members;       // domain ids as clustered
  std::set<std::string> registrars;       // unique registrars seen
  bool registrar_explainable = false;     // one registrar -> could be parking
  bool has_unknown_registrar = false;     // some SLD missing from the map
};

struct RegistrarSpanReport {
  std::vector<ClusterSpan> clusters;      // only clusters with >= 2 members
  // histogram[x] = number of evaluated clusters spanning >= x registrars,
  // for x = 2 .. max observed span. Monotonically non-increasing in x.
  std::map<int, std::size_t> at_least;
};

// Evaluates keyword clusters against a SLD -> registrar map. Domains whose
// SLD is absent count as their own distinct "unknown" registrar and flag
// the cluster — an unknown never silently collapses a span.
RegistrarSpanReport registrar_span(
    const std::vector<std::vector<std::string>>& clusters,
    const std::map<std::string, std::string>& registrar_of);

} // namespace dsentinel::keywords
