// Abuse signatures: the file format, the matcher, and validation against a
// benign corpus. A signature only earns `validated` by scoring zero false
// positives on that corpus, and only validated signatures may classify.
#pragma once

#include "dsentinel/snapshot.hpp"
#include "dsentinel/util.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dsentinel::signature {

struct SignatureFormatError : InputError {
  SignatureFormatError(std::size_t line, const std::string& what)
      : InputError("signature line " + std::to_string(line) + ": " + what),
        line(line) {}
  std::size_t line;
};

enum class IndicatorKind { keyword, sitemap, infrastructure };

std::string_view to_string(IndicatorKind kind);

// Thresholds a sitemap must cross. The static bounds (count, size, entropy)
// are conjunctive over the current sitemap; the delta conditions (new
// sitemap, growth) are disjunctive with each other — "new sitemap or 100KB
// increase" is a single rule.
struct SitemapRule {
  std::optional<std::uint64_t> min_url_count;
  std::optional<std::uint64_t> min_size_bytes;
  std::optional<double> name_entropy_floor;
  bool new_sitemap = false;
  std::optional<std::int64_t> min_growth_bytes;

  bool operator==(const SitemapRule&) const = default;
};

// Attacker-infrastructure fingerprints in the page itself.
struct InfraRules {
  std::vector<std::string> script_suffixes; // path suffix of a loaded script
  std::vector<std::string> href_patterns;   // substring of an anchor href

  bool operator==(const InfraRules&) const = default;
};

struct Signature {
  std::string id;
  std::set<IndicatorKind> indicator_kinds;
  std::set<std::string> keyword_terms;            // lowercase terms/phrases
  std::vector<std::string> html_snippet_patterns; // literal byte patterns
  std::optional<SitemapRule> sitemap_rule;
  InfraRules infra_rules;
  bool validated = false;
  int fp_count_on_benign = 0;

  bool operator==(const Signature&) const = default;
};

// One signature per block in a line-delimited text format; see
// docs/signature-format.md. Throws SignatureFormatError with line numbers.
std::vector<Signature> parse_signatures(const std::string& text);
std::string format_signatures(const std::vector<Signature>& signatures);

// --- matching ------------------------------------------------------------

struct MatchOptions {
  // Distinct keyword terms that must hit before the keyword indicator
  // fires on terms alone, clamped to the signature's term count (a
  // one-term signature fires on its one term). Literal snippets fire the
  // indicator on their own — a byte pattern is already specific.
  int min_keyword_hits = 2;
  // Unvalidated signatures are refused unless dry_run is set.
  bool dry_run = false;
};

struct MatchResult {
  bool matched = false;                    // all present indicator kinds fired
  std::set<IndicatorKind> fired;           // which kinds fired individually
  std::vector<std::string> matched_terms;  // keyword terms that hit
  std::vector<std::string> matched_snippets;
};

// Evaluates one signature against a snapshot and (optionally) the change
// that led to it. `changeset` may be null for a first observation; delta
// conditions then cannot fire. Throws InputError when an unvalidated
// signature is used outside dry-run.
MatchResult match_signature(const snapshot::Snapshot& snap,
                            const snapshot::ChangeSet* changeset,
                            const Signature& sig,
                            const MatchOptions& options = {});

// --- validation ----------------------------------------------------------

struct BenignPage {
  std::string id;     // file name or corpus key
  std::string source; // e.g. "alexa", "fortune500", "university"
  std::string html;
};

struct BenignCorpus {
  std::vector<BenignPage> pages;
};

// Reads a corpus directory: a manifest.csv with header "file,source" next
// to the HTML files it names. Throws InputError on a missing or malformed
// manifest or a missing page file.
BenignCorpus load_benign_corpus(const std::string& dir);

struct ValidationResult {
  Signature signature;                  // with validated / fp count updated
  std::vector<std::string> offending;   // corpus page ids that matched
};

// Runs the signature over every corpus page (dry-run matching, no deltas).
// Zero matches -> validated; any match -> rejected with the offenders
// listed. An empty corpus is an error, never a silent pass.
ValidationResult validate_signature(const Signature& sig,
                                    const BenignCorpus& corpus,
                                    const MatchOptions& options = {});

} // namespace dsentinel::signature
