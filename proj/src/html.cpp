#include "dsentinel/html.hpp"

#include "dsentinel/util.hpp"

#include <algorithm>
#include <cctype>

namespace dsentinel::html {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0x10FFFF) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Attr {
  std::string name;  // lowercased
  std::string value; // entity-decoded
};

// Parses the inside of a tag ("a href='x' … ") into a lowercased name and
// attribute list. `inside` excludes the angle brackets and any leading '/'.
void parse_tag(std::string_view inside, std::string& name, std::vector<Attr>& attrs) {
  std::size_t i = 0;
  while (i < inside.size() && is_name_char(inside[i])) ++i;
  name = util::to_lower(inside.substr(0, i));
  attrs.clear();

  while (i < inside.size()) {
    while (i < inside.size() &&
           std::isspace(static_cast<unsigned char>(inside[i])))
      ++i;
    if (i >= inside.size() || inside[i] == '/') break;
    std::size_t start = i;
    while (i < inside.size() && inside[i] != '=' && inside[i] != '/' &&
           !std::isspace(static_cast<unsigned char>(inside[i])))
      ++i;
    if (i == start) {
      ++i;
      continue;
    }
    Attr attr;
    attr.name = util::to_lower(inside.substr(start, i - start));
    while (i < inside.size() &&
           std::isspace(static_cast<unsigned char>(inside[i])))
      ++i;
    if (i < inside.size() && inside[i] == '=') {
      ++i;
      while (i < inside.size() &&
             std::isspace(static_cast<unsigned char>(inside[i])))
        ++i;
      if (i < inside.size() && (inside[i] == '"' || inside[i] == '\'')) {
        char quote = inside[i++];
        std::size_t vstart = i;
        while (i < inside.size() && inside[i] != quote) ++i;
        attr.value = decode_entities(inside.substr(vstart, i - vstart));
        if (i < inside.size()) ++i;
      } else {
        std::size_t vstart = i;
        while (i < inside.size() &&
               !std::isspace(static_cast<unsigned char>(inside[i])) &&
               inside[i] != '>')
          ++i;
        attr.value = decode_entities(inside.substr(vstart, i - vstart));
      }
    }
    attrs.push_back(std::move(attr));
  }
}

std::string collapse_ws(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_ws = true; // swallow leading whitespace
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

const Attr* find_attr(const std::vector<Attr>& attrs, std::string_view name) {
  for (const auto& a : attrs) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

// Case-insensitive search for "</tag" starting at `from`.
std::size_t find_close(std::string_view doc, std::string_view tag,
                       std::size_t from) {
  std::string needle = "</" + std::string(tag);
  for (std::size_t i = from; i + needle.size() <= doc.size(); ++i) {
    if (doc[i] != '<') continue;
    std::size_t j = 0;
    for (; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(doc[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j])))
        break;
    }
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

} // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view entity = text.substr(i + 1, semi - i - 1);
    if (entity == "amp") {
      out.push_back('&');
    } else if (entity == "lt") {
      out.push_back('<');
    } else if (entity == "gt") {
      out.push_back('>');
    } else if (entity == "quot") {
      out.push_back('"');
    } else if (entity == "apos") {
      out.push_back('\'');
    } else if (entity == "nbsp") {
      out.push_back(' ');
    } else if (!entity.empty() && entity[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = entity.size() > 1;
      if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
        for (std::size_t k = 2; k < entity.size() && ok; ++k) {
          char c = static_cast<char>(
              std::tolower(static_cast<unsigned char>(entity[k])));
          if (c >= '0' && c <= '9')
            cp = cp * 16 + static_cast<std::uint32_t>(c - '0');
          else if (c >= 'a' && c <= 'f')
            cp = cp * 16 + static_cast<std::uint32_t>(c - 'a' + 10);
          else
            ok = false;
          if (cp > 0x10FFFF) ok = false;
        }
        ok = ok && entity.size() > 2;
      } else {
        for (std::size_t k = 1; k < entity.size() && ok; ++k) {
          if (entity[k] >= '0' && entity[k] <= '9')
            cp = cp * 10 + static_cast<std::uint32_t>(entity[k] - '0');
          else
            ok = false;
          if (cp > 0x10FFFF) ok = false;
        }
      }
      if (ok && cp != 0) {
        append_utf8(out, cp);
      } else {
        out.push_back('&');
        ++i;
        continue;
      }
    } else {
      out.push_back('&');
      ++i;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

Scan scan(std::string_view doc) {
  Scan result;
  std::string text_accum;
  std::string pending_anchor_text;
  bool in_anchor = false;
  std::string anchor_href;

  std::size_t i = 0;
  auto flush_text = [&](std::string_view chunk) {
    text_accum.append(chunk);
    if (in_anchor) pending_anchor_text.append(chunk);
  };

  while (i < doc.size()) {
    if (doc[i] != '<') {
      std::size_t next = doc.find('<', i);
      if (next == std::string_view::npos) next = doc.size();
      flush_text(doc.substr(i, next - i));
      i = next;
      continue;
    }
    // Comment?
    if (doc.compare(i, 4, "<!--") == 0) {
      auto end = doc.find("-->", i + 4);
      i = end == std::string_view::npos ? doc.size() : end + 3;
      continue;
    }
    // Doctype / processing instruction.
    if (i + 1 < doc.size() && (doc[i + 1] == '!' || doc[i + 1] == '?')) {
      auto end = doc.find('>', i);
      i = end == std::string_view::npos ? doc.size() : end + 1;
      continue;
    }
    auto end = doc.find('>', i);
    if (end == std::string_view::npos) break; // truncated tag: stop cleanly
    bool closing = i + 1 < doc.size() && doc[i + 1] == '/';
    std::string_view inside =
        doc.substr(i + 1 + (closing ? 1 : 0), end - i - 1 - (closing ? 1 : 0));
    std::string tag;
    std::vector<Attr> attrs;
    parse_tag(inside, tag, attrs);
    std::size_t after = end + 1;

    if (!closing && (tag == "script" || tag == "style")) {
      if (tag == "script") {
        if (const auto* src = find_attr(attrs, "src"); src && !src->value.empty())
          result.script_srcs.push_back(src->value);
      }
      auto close = find_close(doc, tag, after);
      if (close == std::string_view::npos) {
        i = doc.size();
      } else {
        auto close_end = doc.find('>', close);
        i = close_end == std::string_view::npos ? doc.size() : close_end + 1;
      }
      continue;
    }

    if (!closing && tag == "title" && result.title.empty()) {
      auto close = find_close(doc, "title", after);
      auto raw = doc.substr(after, (close == std::string_view::npos
                                        ? doc.size()
                                        : close) -
                                       after);
      result.title = collapse_ws(decode_entities(raw));
      flush_text(raw);
      i = close == std::string_view::npos ? doc.size() : close;
      continue;
    }

    if (!closing && tag == "meta") {
      const auto* key = find_attr(attrs, "name");
      if (!key) key = find_attr(attrs, "property");
      const auto* content = find_attr(attrs, "content");
      if (key && content) {
        auto lower = util::to_lower(key->value);
        if (!result.meta.contains(lower)) result.meta[lower] = content->value;
      }
      i = after;
      continue;
    }

    if (!closing && (tag == "h1" || tag == "h2" || tag == "h3")) {
      auto close = find_close(doc, tag, after);
      auto raw = doc.substr(after, (close == std::string_view::npos
                                        ? doc.size()
                                        : close) -
                                       after);
      // Strip nested tags from the heading text; each stripped tag is a
      // word boundary.
      std::string flat;
      bool in_tag = false;
      for (char c : raw) {
        if (c == '<') {
          in_tag = true;
          flat.push_back(' ');
        } else if (c == '>') {
          in_tag = false;
        } else if (!in_tag) {
          flat.push_back(c);
        }
      }
      auto heading = collapse_ws(decode_entities(flat));
      if (!heading.empty()) result.headings.push_back(heading);
      flush_text(flat);
      i = close == std::string_view::npos ? doc.size() : close;
      continue;
    }

    if (!closing && tag == "link") {
      if (const auto* href = find_attr(attrs, "href"); href && !href->value.empty())
        result.link_hrefs.push_back(href->value);
      i = after;
      continue;
    }

    if (tag == "a") {
      if (!closing) {
        // A new <a> before the previous one closed: flush the open anchor
        // first, then start over. Hijack pages rarely nest anchors on
        // purpose; they just forget to close them.
        if (in_anchor)
          result.anchors.push_back(
              {anchor_href, collapse_ws(decode_entities(pending_anchor_text))});
        in_anchor = true;
        pending_anchor_text.clear();
        const auto* href = find_attr(attrs, "href");
        anchor_href = href ? href->value : "";
      } else if (in_anchor) {
        in_anchor = false;
        result.anchors.push_back(
            {anchor_href, collapse_ws(decode_entities(pending_anchor_text))});
      }
      i = after;
      continue;
    }

    // Generic tag: a block boundary in the text stream.
    flush_text(" ");
    i = after;
  }

  // Document ended inside an unclosed <a …>: keep what we have. Links on
  // truncated or malformed pages are exactly the ones worth inspecting.
  if (in_anchor)
    result.anchors.push_back(
        {anchor_href, collapse_ws(decode_entities(pending_anchor_text))});

  result.text = collapse_ws(decode_entities(text_accum));
  return result;
}

std::string extract_text(std::string_view document) {
  return scan(document).text;
}

std::string normalize(std::string_view doc) {
  std::string out;
  out.reserve(doc.size());
  std::size_t i = 0;
  bool pending_space = false;
  auto push = [&](char c) {
    if (c == ' ') {
      pending_space = !out.empty();
      return;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  };

  while (i < doc.size()) {
    if (doc.compare(i, 4, "<!--") == 0) {
      auto end = doc.find("-->", i + 4);
      i = end == std::string_view::npos ? doc.size() : end + 3;
      continue;
    }
    if (doc[i] == '<') {
      auto end = doc.find('>', i);
      if (end == std::string_view::npos) {
        // Truncated tag: emit the rest verbatim (lowercased name part).
        end = doc.size() - 1;
      }
      push('<');
      ++i;
      if (i < doc.size() && doc[i] == '/') {
        push('/');
        ++i;
      }
      // Lowercase the tag name…
      while (i <= end && i < doc.size() && is_name_char(doc[i])) {
        push(static_cast<char>(std::tolower(static_cast<unsigned char>(doc[i]))));
        ++i;
      }
      // …and attribute names, leaving quoted values alone.
      bool in_quote = false;
      char quote = 0;
      bool in_value = false;
      while (i < doc.size() && (in_quote || doc[i] != '>')) {
        char c = doc[i];
        if (in_quote) {
          out.push_back(c);
          if (c == quote) in_quote = false;
        } else if (c == '"' || c == '\'') {
          if (pending_space) {
            out.push_back(' ');
            pending_space = false;
          }
          out.push_back(c);
          in_quote = true;
          quote = c;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
          push(' ');
          in_value = false;
        } else if (c == '=') {
          push('=');
          in_value = true;
        } else {
          push(in_value ? c
                        : static_cast<char>(
                              std::tolower(static_cast<unsigned char>(c))));
        }
        ++i;
      }
      if (i < doc.size()) {
        push('>');
        ++i;
      }
      continue;
    }
    char c = doc[i];
    if (std::isspace(static_cast<unsigned char>(c)))
      push(' ');
    else
      push(c);
    ++i;
  }
  return out;
}

} // namespace dsentinel::html
