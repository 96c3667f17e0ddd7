#include "dsentinel/keywords.hpp"

#include "dsentinel/html.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace dsentinel::keywords {

namespace {

// Function words carry no topical signal; dropping them keeps n-grams to
// content terms. English plus the Indonesian particles that saturate the
// gambling pages this tooling keeps meeting.
const char* const kStopwords[] = {
    "a",     "an",    "and",   "are",   "as",      "at",     "be",
    "but",   "by",    "can",   "do",    "does",    "for",    "from",
    "has",   "have",  "here",  "how",   "i",       "if",     "in",
    "is",    "it",    "its",   "more",  "most",    "my",     "no",
    "not",   "of",    "on",    "or",    "our",     "so",     "some",
    "such",  "than",  "that",  "the",   "their",   "then",   "there",
    "these", "they",  "this",  "those", "to",      "too",    "up",
    "was",   "we",    "were",  "what",  "when",    "where",  "which",
    "who",   "why",   "will",  "with",  "you",     "your",
    // Indonesian particles
    "yang",  "dan",   "di",    "ke",    "dari",    "untuk",  "dengan",
    "ini",   "itu",   "atau",  "pada",  "adalah",
};

bool is_token_byte(unsigned char c) {
  // Letters and digits form tokens; so does any non-ASCII byte, so that
  // UTF-8 words survive intact. Everything else separates.
  return std::isalnum(c) != 0 || c >= 0x80;
}

std::vector<std::string> tokenize(std::string_view unit,
                                  const std::set<std::string>& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords.contains(current)) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (unsigned char c : unit) {
    if (is_token_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

void add_unit(const std::string& unit, const ExtractOptions& options,
              const std::set<std::string>& stopwords,
              std::vector<std::string>& out,
              std::unordered_set<std::string>& seen) {
  auto tokens = tokenize(unit, stopwords);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string gram;
    for (std::size_t n = 0; n < options.max_ngram && i + n < tokens.size();
         ++n) {
      if (n > 0) gram += ' ';
      gram += tokens[i + n];
      if (seen.insert(gram).second) out.push_back(gram);
    }
  }
}

struct LexiconEntry {
  Topic topic;
  const char* term;
};

// Topic vocabularies. Multi-word entries outweigh single words when voting
// because they are far more specific.
const LexiconEntry kLexicon[] = {
    {Topic::gambling, "slot"},
    {Topic::gambling, "judi"},
    {Topic::gambling, "gacor"},
    {Topic::gambling, "joker123"},
    {Topic::gambling, "terpercaya"},
    {Topic::gambling, "agen"},
    {Topic::gambling, "daftar"},
    {Topic::gambling, "bola"},
    {Topic::gambling, "pulsa"},
    {Topic::gambling, "casino"},
    {Topic::gambling, "poker"},
    {Topic::gambling, "togel"},
    {Topic::gambling, "taruhan"},
    {Topic::gambling, "jackpot"},
    {Topic::gambling, "betting"},
    {Topic::gambling, "situs judi"},
    {Topic::gambling, "situs slot"},
    {Topic::gambling, "slot gacor"},
    {Topic::gambling, "judi online"},
    {Topic::gambling, "slot online"},
    {Topic::gambling, "judi slot online"},
    {Topic::adult, "sex"},
    {Topic::adult, "porn"},
    {Topic::adult, "porno"},
    {Topic::adult, "xxx"},
    {Topic::adult, "bokep"},
    {Topic::adult, "escort"},
    {Topic::adult, "webcam sex"},
    {Topic::seo_spam, "seo"},
    {Topic::seo_spam, "backlink"},
    {Topic::seo_spam, "backlinks"},
    {Topic::seo_spam, "pbn"},
    {Topic::seo_spam, "doorway"},
    {Topic::seo_spam, "link building"},
    {Topic::seo_spam, "guest post"},
    {Topic::pharma, "viagra"},
    {Topic::pharma, "cialis"},
    {Topic::pharma, "sildenafil"},
    {Topic::pharma, "tadalafil"},
    {Topic::pharma, "pills"},
    {Topic::pharma, "pharmacy"},
    {Topic::pharma, "online pharmacy"},
};

double term_weight(std::string_view term) {
  // One point per word in the matched term.
  return 1.0 + static_cast<double>(std::count(term.begin(), term.end(), ' '));
}

} // namespace

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words(std::begin(kStopwords),
                                           std::end(kStopwords));
  return words;
}

std::vector<std::string> extract_keywords(const std::string& doc,
                                          const ExtractOptions& options) {
  const auto& stopwords =
      options.stopwords ? *options.stopwords : default_stopwords();
  auto scan = html::scan(doc);

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;

  add_unit(scan.title, options, stopwords, out, seen);
  if (auto it = scan.meta.find("keywords"); it != scan.meta.end()) {
    // Each comma-separated entry is its own phrase; n-grams never bridge
    // two entries.
    for (const auto& segment : util::split(it->second, ',')) {
      add_unit(segment, options, stopwords, out, seen);
    }
  }
  if (auto it = scan.meta.find("description"); it != scan.meta.end()) {
    add_unit(it->second, options, stopwords, out, seen);
  }
  for (const auto& heading : scan.headings) {
    add_unit(heading, options, stopwords, out, seen);
  }
  for (const auto& anchor : scan.anchors) {
    add_unit(anchor.text, options, stopwords, out, seen);
  }
  return out;
}

std::vector<std::string> extract_keywords_simple(const std::string& doc) {
  return extract_keywords(doc);
}

std::string_view to_string(Topic topic) {
  switch (topic) {
    case Topic::gambling: return "gambling";
    case Topic::adult: return "adult";
    case Topic::seo_spam: return "seo-spam";
    case Topic::pharma: return "pharma";
    case Topic::japanese_keyword_hack: return "japanese-keyword-hack";
    case Topic::other: return "other";
  }
  return "other";
}

TopicScore classify_content(const std::vector<std::string>& keyword_list,
                            const PageContext& context) {
  // A Japanese page hiding behind a generated sitemap of thousands of pages
  // is its own category regardless of what the lexicons say.
  if (context.language && *context.language == "ja" && context.sitemap_urls &&
      *context.sitemap_urls > 1000) {
    return {Topic::japanese_keyword_hack,
            static_cast<double>(*context.sitemap_urls) / 1000.0};
  }

  std::unordered_set<std::string> present(keyword_list.begin(),
                                          keyword_list.end());
  std::map<Topic, double> votes;
  for (const auto& entry : kLexicon) {
    if (present.contains(entry.term)) votes[entry.topic] += term_weight(entry.term);
  }

  TopicScore best; // Topic::other, score 0
  for (const auto& [topic, score] : votes) {
    if (score > best.score) best = {topic, score};
  }
  return best;
}

std::vector<std::vector<std::string>> cluster_by_keywords(
    const std::vector<Page>& pages) {
  std::vector<std::vector<std::string>> clusters;
  std::map<std::vector<std::string>, std::size_t> index_of;
  for (const auto& page : pages) {
    std::vector<std::string> key = page.keywords;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    auto [it, inserted] = index_of.try_emplace(std::move(key), clusters.size());
    if (inserted) clusters.emplace_back();
    clusters[it->second].push_back(page.id);
  }
  return clusters;
}

RegistrarSpanReport registrar_span(
    const std::vector<std::vector<std::string>>& clusters,
    const std::map<std::string, std::string>& registrar_of) {
  RegistrarSpanReport report;
  std::size_t max_span = 0;
  for (const auto& members : clusters) {
    if (members.size() < 2) continue; // only co-changing groups say anything
    ClusterSpan span;
    span.members = members;
    for (const auto& domain : members) {
      auto sld = util::sld_of(domain);
      if (auto it = registrar_of.find(sld); it != registrar_of.end()) {
        span.registrars.insert(it->second);
      } else {
        // A missing mapping must widen the span, not shrink it: each
        // unknown SLD counts as its own registrar and is flagged.
        span.registrars.insert("unknown:" + sld);
        span.has_unknown_registrar = true;
      }
    }
    span.registrar_explainable = span.registrars.size() == 1;
    max_span = std::max(max_span, span.registrars.size());
    report.clusters.push_back(std::move(span));
  }
  if (!report.clusters.empty()) {
    for (std::size_t x = 2; x <= std::max<std::size_t>(2, max_span); ++x) {
      std::size_t count = 0;
      for (const auto& span : report.clusters) {
        if (span.registrars.size() >= x) ++count;
      }
      report.at_least[static_cast<int>(x)] = count;
    }
  }
  return report;
}

} // namespace dsentinel::keywords
