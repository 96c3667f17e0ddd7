// Tolerant single-pass HTML scanning: the handful of document features the
// change tracker and the abuse signatures consume. Not a DOM — real-world
// hijack pages are frequently malformed, so everything here degrades
// gracefully instead of failing.
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dsentinel::html {

struct Anchor {
  std::string href;
  std::string text;
};

struct Scan {
  std::string title;                         // first <title>, entity-decoded
  std::map<std::string, std::string> meta;   // name/property (lowercased) -> content
  std::vector<std::string> headings;         // h1-h3 text, document order
  std::vector<Anchor> anchors;               // <a href>; an unclosed trailing <a> still counts
  std::vector<std::string> link_hrefs;       // href attribute of <link …> tags
  std::vector<std::string> script_srcs;      // src attribute of <script src=…>
  std::string text;                          // visible text, whitespace-collapsed
};

Scan scan(std::string_view document);

// Visible text only (what scan().text holds).
std::string extract_text(std::string_view document);

// Canonical form for content hashing: comments stripped, tag and attribute
// names lowercased, whitespace runs collapsed. Text and attribute values
// keep their bytes.
std::string normalize(std::string_view document);

// Decodes the common named entities plus numeric character references
// (UTF-8 output). Unknown entities pass through untouched.
std::string decode_entities(std::string_view text);

} // namespace dsentinel::html
