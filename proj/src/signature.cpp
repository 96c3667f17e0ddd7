#include "dsentinel/signature.hpp"

#include "dsentinel/html.hpp"
#include "dsentinel/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace dsentinel::signature {

namespace {

constexpr std::string_view kFormatHeader = "dsentinel-signatures 1";

// --- quoted-string grammar ------------------------------------------------

std::string parse_quoted(std::string_view text, std::size_t line_no) {
  auto s = util::trim(text);
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
    throw SignatureFormatError(line_no, "expected a double-quoted string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c != '\\') {
      if (c == '"') {
        throw SignatureFormatError(line_no,
                                   "unescaped quote inside a string");
      }
      out.push_back(c);
      continue;
    }
    if (i + 1 >= s.size() - 1) {
      throw SignatureFormatError(line_no, "dangling escape at end of string");
    }
    char esc = s[++i];
    switch (esc) {
      case '\\': out.push_back('\\'); break;
      case '"': out.push_back('"'); break;
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case 'x': {
        if (i + 2 >= s.size() - 1) { // need two hex digits inside the quotes
          throw SignatureFormatError(line_no, "\\x needs two hex digits");
        }
        auto hex = [&](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          throw SignatureFormatError(line_no, "\\x needs two hex digits");
        };
        int hi = hex(s[i + 1]);
        int lo = hex(s[i + 2]);
        i += 2;
        out.push_back(static_cast<char>(hi * 16 + lo));
        break;
      }
      default:
        throw SignatureFormatError(
            line_no, std::string("unknown escape \\") + esc);
    }
  }
  return out;
}

std::string quote(std::string_view raw) {
  std::string out = "\"";
  for (unsigned char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[5];
          std::snprintf(buf, sizeof buf, "\\x%02x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
  return out;
}

std::uint64_t parse_uint(std::string_view text, std::size_t line_no) {
  auto s = util::trim(text);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SignatureFormatError(line_no, "expected an unsigned integer");
  }
  return value;
}

double parse_double(std::string_view text, std::size_t line_no) {
  auto s = util::trim(text);
  try {
    std::size_t used = 0;
    double value = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing junk");
    return value;
  } catch (const std::exception&) {
    throw SignatureFormatError(line_no, "expected a number");
  }
}

// Splits "directive rest-of-line"; the directive is lowercased.
std::pair<std::string, std::string> split_directive(std::string_view line) {
  auto trimmed = util::trim(line);
  auto space = trimmed.find_first_of(" \t");
  if (space == std::string::npos) return {util::to_lower(trimmed), ""};
  return {util::to_lower(trimmed.substr(0, space)),
          util::trim(trimmed.substr(space + 1))};
}

void check_consistency(const Signature& sig, std::size_t line_no) {
  if (sig.indicator_kinds.empty()) {
    throw SignatureFormatError(line_no,
                               "signature '" + sig.id +
                                   "' declares no indicator kinds");
  }
  bool has_keyword_payload =
      !sig.keyword_terms.empty() || !sig.html_snippet_patterns.empty();
  bool wants_keyword = sig.indicator_kinds.contains(IndicatorKind::keyword);
  if (wants_keyword && !has_keyword_payload) {
    throw SignatureFormatError(
        line_no, "keyword indicator without any term or snippet");
  }
  if (!wants_keyword && has_keyword_payload) {
    throw SignatureFormatError(
        line_no, "terms/snippets given but keyword indicator not declared");
  }
  bool wants_sitemap = sig.indicator_kinds.contains(IndicatorKind::sitemap);
  if (wants_sitemap && !sig.sitemap_rule) {
    throw SignatureFormatError(line_no,
                               "sitemap indicator without any sitemap rule");
  }
  if (!wants_sitemap && sig.sitemap_rule) {
    throw SignatureFormatError(
        line_no, "sitemap rule given but sitemap indicator not declared");
  }
  bool has_infra_payload = !sig.infra_rules.script_suffixes.empty() ||
                           !sig.infra_rules.href_patterns.empty();
  bool wants_infra =
      sig.indicator_kinds.contains(IndicatorKind::infrastructure);
  if (wants_infra && !has_infra_payload) {
    throw SignatureFormatError(
        line_no, "infrastructure indicator without any pattern");
  }
  if (!wants_infra && has_infra_payload) {
    throw SignatureFormatError(
        line_no,
        "infrastructure patterns given but indicator not declared");
  }
}

// --- matching helpers ------------------------------------------------------

std::string strip_url_decorations(std::string_view url) {
  auto cut = url.find_first_of("?#");
  return std::string(url.substr(0, cut));
}

bool suffix_matches(std::string_view src, std::string_view suffix) {
  auto path = strip_url_decorations(src);
  return path.size() >= suffix.size() &&
         path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

std::string_view to_string(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::keyword: return "keyword";
    case IndicatorKind::sitemap: return "sitemap";
    case IndicatorKind::infrastructure: return "infrastructure";
  }
  return "keyword";
}

std::vector<Signature> parse_signatures(const std::string& text) {
  std::vector<Signature> out;
  std::unordered_set<std::string> ids;

  std::optional<Signature> current;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t block_start = 0;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = util::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!header_seen) {
      if (line != kFormatHeader) {
        throw SignatureFormatError(
            line_no, "missing format header '" +
                         std::string(kFormatHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    auto [directive, rest] = split_directive(line);

    if (directive == "signature") {
      if (current) {
        throw SignatureFormatError(line_no,
                                   "'signature' inside an open block");
      }
      if (rest.empty()) {
        throw SignatureFormatError(line_no, "signature needs an id");
      }
      if (rest.find_first_of(" \t\"") != std::string::npos) {
        throw SignatureFormatError(line_no,
                                   "signature id must be a single word");
      }
      if (!ids.insert(rest).second) {
        throw SignatureFormatError(line_no, "duplicate id '" + rest + "'");
      }
      current.emplace();
      current->id = rest;
      block_start = line_no;
      continue;
    }
    if (!current) {
      throw SignatureFormatError(line_no,
                                 "'" + directive + "' outside a signature");
    }

    if (directive == "end") {
      check_consistency(*current, line_no);
      out.push_back(std::move(*current));
      current.reset();
    } else if (directive == "indicator") {
      auto kind = util::to_lower(util::trim(rest));
      if (kind == "keyword") {
        current->indicator_kinds.insert(IndicatorKind::keyword);
      } else if (kind == "sitemap") {
        current->indicator_kinds.insert(IndicatorKind::sitemap);
      } else if (kind == "infrastructure") {
        current->indicator_kinds.insert(IndicatorKind::infrastructure);
      } else {
        throw SignatureFormatError(line_no,
                                   "unknown indicator '" + kind + "'");
      }
    } else if (directive == "term") {
      current->keyword_terms.insert(
          util::to_lower(parse_quoted(rest, line_no)));
    } else if (directive == "snippet") {
      current->html_snippet_patterns.push_back(parse_quoted(rest, line_no));
    } else if (directive == "script-suffix") {
      current->infra_rules.script_suffixes.push_back(
          parse_quoted(rest, line_no));
    } else if (directive == "href-contains") {
      current->infra_rules.href_patterns.push_back(
          parse_quoted(rest, line_no));
    } else if (directive == "sitemap") {
      auto [param, value] = split_directive(rest);
      auto& rule =
          current->sitemap_rule ? *current->sitemap_rule
                                : current->sitemap_rule.emplace();
      if (param == "new") {
        rule.new_sitemap = true;
      } else if (param == "min-urls") {
        rule.min_url_count = parse_uint(value, line_no);
      } else if (param == "min-size") {
        rule.min_size_bytes = parse_uint(value, line_no);
      } else if (param == "min-growth") {
        rule.min_growth_bytes =
            static_cast<std::int64_t>(parse_uint(value, line_no));
      } else if (param == "entropy-floor") {
        rule.name_entropy_floor = parse_double(value, line_no);
      } else {
        throw SignatureFormatError(line_no,
                                   "unknown sitemap parameter '" + param +
                                       "'");
      }
    } else if (directive == "validated") {
      current->validated = true;
      current->fp_count_on_benign = 0;
    } else {
      throw SignatureFormatError(line_no,
                                 "unknown directive '" + directive + "'");
    }
  }
  if (current) {
    throw SignatureFormatError(block_start,
                               "signature '" + current->id +
                                   "' never reaches 'end'");
  }
  if (!header_seen) {
    throw SignatureFormatError(
        1, "missing format header '" + std::string(kFormatHeader) + "'");
  }
  return out;
}

std::string format_signatures(const std::vector<Signature>& signatures) {
  std::string out(kFormatHeader);
  out += "\n";
  for (const auto& sig : signatures) {
    out += "\nsignature " + sig.id + "\n";
    for (auto kind : sig.indicator_kinds) {
      out += "  indicator " + std::string(to_string(kind)) + "\n";
    }
    for (const auto& term : sig.keyword_terms) {
      out += "  term " + quote(term) + "\n";
    }
    for (const auto& snippet : sig.html_snippet_patterns) {
      out += "  snippet " + quote(snippet) + "\n";
    }
    if (sig.sitemap_rule) {
      const auto& rule = *sig.sitemap_rule;
      if (rule.new_sitemap) out += "  sitemap new\n";
      if (rule.min_url_count) {
        out += "  sitemap min-urls " + std::to_string(*rule.min_url_count) +
               "\n";
      }
      if (rule.min_size_bytes) {
        out += "  sitemap min-size " + std::to_string(*rule.min_size_bytes) +
               "\n";
      }
      if (rule.min_growth_bytes) {
        out += "  sitemap min-growth " +
               std::to_string(*rule.min_growth_bytes) + "\n";
      }
      if (rule.name_entropy_floor) {
        std::ostringstream num;
        num << *rule.name_entropy_floor;
        out += "  sitemap entropy-floor " + num.str() + "\n";
      }
    }
    for (const auto& suffix : sig.infra_rules.script_suffixes) {
      out += "  script-suffix " + quote(suffix) + "\n";
    }
    for (const auto& pattern : sig.infra_rules.href_patterns) {
      out += "  href-contains " + quote(pattern) + "\n";
    }
    if (sig.validated) out += "  validated\n";
    out += "end\n";
  }
  return out;
}

MatchResult match_signature(const snapshot::Snapshot& snap,
                            const snapshot::ChangeSet* changeset,
                            const Signature& sig,
                            const MatchOptions& options) {
  if (!sig.validated && !options.dry_run) {
    throw InputError("signature '" + sig.id +
                     "' is not validated; classification refused "
                     "(use dry-run to evaluate candidates)");
  }

  MatchResult result;

  if (sig.indicator_kinds.contains(IndicatorKind::keyword)) {
    if (snap.index_html) {
      auto extracted = keywords::extract_keywords(*snap.index_html);
      std::unordered_set<std::string> present(extracted.begin(),
                                              extracted.end());
      for (const auto& term : sig.keyword_terms) {
        if (present.contains(term)) result.matched_terms.push_back(term);
      }
      for (const auto& snippet : sig.html_snippet_patterns) {
        if (snap.index_html->find(snippet) != std::string::npos) {
          result.matched_snippets.push_back(snippet);
        }
      }
    }
    // A signature cannot demand more distinct hits than it has terms; a
    // one-term signature fires on its one term (and earns its rejection
    // from validation if that term is too generic).
    int required = std::min<int>(options.min_keyword_hits,
                                 static_cast<int>(sig.keyword_terms.size()));
    bool enough_terms = !sig.keyword_terms.empty() &&
                        static_cast<int>(result.matched_terms.size()) >=
                            std::max(required, 1);
    if (enough_terms || !result.matched_snippets.empty()) {
      result.fired.insert(IndicatorKind::keyword);
    }
  }

  if (sig.indicator_kinds.contains(IndicatorKind::sitemap) &&
      sig.sitemap_rule) {
    const auto& rule = *sig.sitemap_rule;
    bool statics_specified = rule.min_url_count || rule.min_size_bytes ||
                             rule.name_entropy_floor;
    bool statics_ok = true;
    if (statics_specified) {
      if (!snap.sitemap) {
        statics_ok = false;
      } else {
        const auto& stats = *snap.sitemap;
        if (rule.min_url_count && stats.url_count < *rule.min_url_count)
          statics_ok = false;
        if (rule.min_size_bytes &&
            stats.total_size_bytes < *rule.min_size_bytes)
          statics_ok = false;
        if (rule.name_entropy_floor &&
            stats.name_entropy < *rule.name_entropy_floor)
          statics_ok = false;
      }
    }
    // Delta conditions are alternatives to each other: "new sitemap or
    // 100KB growth" is a single rule.
    bool deltas_specified = rule.new_sitemap || rule.min_growth_bytes;
    bool deltas_ok = !deltas_specified;
    if (deltas_specified && changeset) {
      if (rule.new_sitemap && changeset->sitemap_new) deltas_ok = true;
      if (rule.min_growth_bytes &&
          changeset->sitemap_growth_bytes >= *rule.min_growth_bytes)
        deltas_ok = true;
    }
    if (statics_ok && deltas_ok) result.fired.insert(IndicatorKind::sitemap);
  }

  if (sig.indicator_kinds.contains(IndicatorKind::infrastructure) &&
      snap.index_html) {
    auto scan = html::scan(*snap.index_html);
    bool hit = false;
    for (const auto& suffix : sig.infra_rules.script_suffixes) {
      for (const auto& src : scan.script_srcs) {
        if (suffix_matches(src, suffix)) hit = true;
      }
    }
    for (const auto& pattern : sig.infra_rules.href_patterns) {
      for (const auto& anchor : scan.anchors) {
        if (anchor.href.find(pattern) != std::string::npos) hit = true;
      }
    }
    if (hit) result.fired.insert(IndicatorKind::infrastructure);
  }

  result.matched = !sig.indicator_kinds.empty() &&
                   std::all_of(sig.indicator_kinds.begin(),
                               sig.indicator_kinds.end(),
                               [&](IndicatorKind kind) {
                                 return result.fired.contains(kind);
                               });
  return result;
}

BenignCorpus load_benign_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  auto manifest_path = fs::path(dir) / "manifest.csv";
  std::ifstream manifest(manifest_path);
  if (!manifest) {
    throw InputError("benign corpus: cannot open " + manifest_path.string());
  }

  BenignCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    auto trimmed = util::trim(line);
    if (trimmed.empty()) continue;
    auto fields = util::csv_parse_line(trimmed);
    if (line_no == 1) {
      if (fields != std::vector<std::string>{"file", "source"}) {
        throw InputError("benign corpus: manifest header must be "
                         "'file,source'");
      }
      continue;
    }
    if (fields.size() != 2) {
      throw InputError("benign corpus: manifest line " +
                       std::to_string(line_no) + " needs 2 fields");
    }
    auto page_path = fs::path(dir) / fields[0];
    std::ifstream page(page_path, std::ios::binary);
    if (!page) {
      throw InputError("benign corpus: cannot open " + page_path.string());
    }
    std::string html((std::istreambuf_iterator<char>(page)),
                     std::istreambuf_iterator<char>());
    corpus.pages.push_back({fields[0], fields[1], std::move(html)});
  }
  return corpus;
}

ValidationResult validate_signature(const Signature& sig,
                                    const BenignCorpus& corpus,
                                    const MatchOptions& options) {
  if (corpus.pages.empty()) {
    throw InputError("benign corpus is empty; a signature can only be "
                     "validated against real benign pages");
  }
  MatchOptions dry = options;
  dry.dry_run = true;

  ValidationResult result;
  result.signature = sig;
  for (const auto& page : corpus.pages) {
    snapshot::Snapshot snap;
    snap.fqdn = page.id;
    snap.index_html = page.html;
    auto match = match_signature(snap, nullptr, sig, dry);
    if (match.matched) result.offending.push_back(page.id);
  }
  result.signature.fp_count_on_benign =
      static_cast<int>(result.offending.size());
  result.signature.validated = result.offending.empty();
  return result;
}

} // namespace dsentinel::signature
