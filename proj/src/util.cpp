#include "dsentinel/util.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>

namespace dsentinel::util {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

// --- domain names -------------------------------------------------------

static bool valid_label(std::string_view label) {
  if (label.empty() || label.size() > 63) return false;
  for (char c : label) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '-' || c == '_')) return false;
  }
  return true;
}

std::optional<std::string> normalize_fqdn(std::string_view fqdn) {
  std::string trimmed = trim(fqdn);
  fqdn = trimmed;
  if (!fqdn.empty() && fqdn.back() == '.') fqdn.remove_suffix(1);
  if (fqdn.empty() || fqdn.size() > 253) return std::nullopt;
  for (char c : fqdn) {
    if (static_cast<unsigned char>(c) >= 0x80) return idn_to_punycode(fqdn);
  }
  std::string lowered = to_lower(fqdn);
  for (const auto& label : split(lowered, '.')) {
    if (!valid_label(label)) return std::nullopt;
  }
  return lowered;
}

// Decodes one UTF-8 sequence starting at s[i]; advances i. Returns nullopt
// on malformed input.
static std::optional<std::uint32_t> utf8_next(std::string_view s, std::size_t& i) {
  unsigned char c0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if (c0 < 0x80) { ++i; return c0; }
  if ((c0 & 0xE0) == 0xC0 && cont(1)) {
    std::uint32_t cp = (c0 & 0x1Fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
    i += 2;
    if (cp < 0x80) return std::nullopt;
    return cp;
  }
  if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    std::uint32_t cp = (c0 & 0x0Fu) << 12 |
                       (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                       (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
    i += 3;
    if (cp < 0x800) return std::nullopt;
    return cp;
  }
  if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    std::uint32_t cp = (c0 & 0x07u) << 18 |
                       (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                       (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                       (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
    i += 4;
    if (cp < 0x10000 || cp > 0x10FFFF) return std::nullopt;
    return cp;
  }
  return std::nullopt;
}

// RFC 3492 punycode encoding of one label's code points.
static std::optional<std::string> punycode_encode(const std::vector<std::uint32_t>& input) {
  constexpr std::uint32_t base = 36, tmin = 1, tmax = 26, skew = 38, damp = 700;
  constexpr std::uint32_t initial_bias = 72, initial_n = 128;
  auto adapt = [&](std::uint32_t delta, std::uint32_t numpoints, bool firsttime) {
    delta = firsttime ? delta / damp : delta / 2;
    delta += delta / numpoints;
    std::uint32_t k = 0;
    while (delta > ((base - tmin) * tmax) / 2) {
      delta /= base - tmin;
      k += base;
    }
    return k + (((base - tmin + 1) * delta) / (delta + skew));
  };
  auto digit_char = [](std::uint32_t d) -> char {
    return d < 26 ? static_cast<char>('a' + d) : static_cast<char>('0' + d - 26);
  };

  std::string out;
  for (std::uint32_t cp : input) {
    if (cp < 0x80) out.push_back(static_cast<char>(cp));
  }
  std::uint32_t handled = static_cast<std::uint32_t>(out.size());
  const std::uint32_t basic = handled;
  if (basic > 0) out.push_back('-');

  std::uint32_t n = initial_n, delta = 0, bias = initial_bias;
  while (handled < input.size()) {
    std::uint32_t m = 0x110000;
    for (std::uint32_t cp : input) {
      if (cp >= n && cp < m) m = cp;
    }
    if (m - n > (0xFFFFFFFFu - delta) / (handled + 1)) return std::nullopt;
    delta += (m - n) * (handled + 1);
    n = m;
    for (std::uint32_t cp : input) {
      if (cp < n && ++delta == 0) return std::nullopt;
      if (cp == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = base;; k += base) {
          std::uint32_t t = k <= bias ? tmin : (k >= bias + tmax ? tmax : k - bias);
          if (q < t) break;
          out.push_back(digit_char(t + (q - t) % (base - t)));
          q = (q - t) / (base - t);
        }
        out.push_back(digit_char(q));
        bias = adapt(delta, handled + 1, handled == basic);
        delta = 0;
        ++handled;
      }
    }
    ++delta;
    ++n;
  }
  return out;
}

std::optional<std::string> idn_to_punycode(std::string_view fqdn) {
  if (!fqdn.empty() && fqdn.back() == '.') fqdn.remove_suffix(1);
  if (fqdn.empty()) return std::nullopt;
  std::string result;
  for (std::string_view label : split(fqdn, '.')) {
    if (!result.empty()) result.push_back('.');
    std::vector<std::uint32_t> cps;
    bool ascii_only = true;
    std::size_t i = 0;
    while (i < label.size()) {
      auto cp = utf8_next(label, i);
      if (!cp) return std::nullopt;
      std::uint32_t v = *cp;
      // ASCII uppercase folding; non-ASCII passed through unmapped.
      if (v >= 'A' && v <= 'Z') v += 32;
      if (v >= 0x80) ascii_only = false;
      cps.push_back(v);
    }
    if (ascii_only) {
      std::string plain;
      for (std::uint32_t v : cps) plain.push_back(static_cast<char>(v));
      result += plain;
    } else {
      auto enc = punycode_encode(cps);
      if (!enc) return std::nullopt;
      result += "xn--" + *enc;
    }
  }
  return normalize_fqdn(result);
}

std::vector<std::string> labels_of(std::string_view fqdn) {
  if (!fqdn.empty() && fqdn.back() == '.') fqdn.remove_suffix(1);
  if (fqdn.empty()) return {};
  return split(fqdn, '.');
}

// Multi-label public suffixes that show up in the kinds of victim lists this
// tool ingests. Anything absent falls back to the last two labels.
static const char* const kMultiLabelSuffixes[] = {
    "co.uk",  "org.uk", "ac.uk",  "gov.uk", "com.au", "net.au", "org.au",
    "edu.au", "gov.au", "co.jp",  "ne.jp",  "or.jp",  "ac.jp",  "go.jp",
    "com.br", "net.br", "org.br", "gov.br", "edu.br", "co.nz",  "ac.nz",
    "co.in",  "ac.in",  "gov.in", "com.cn", "edu.cn", "gov.cn", "com.mx",
    "com.sg", "edu.sg", "co.kr",  "ac.kr",  "co.za",  "ac.za",  "com.tr",
    "edu.tr", "com.tw", "edu.tw", "co.id",  "ac.id",  "go.id",  "com.hk",
    "edu.hk", "com.my", "edu.my", "co.th",  "ac.th",
};

std::string sld_of(std::string_view fqdn) {
  auto labels = labels_of(fqdn);
  if (labels.size() <= 2) return std::string(fqdn.empty() || fqdn.back() != '.'
                                                 ? fqdn
                                                 : fqdn.substr(0, fqdn.size() - 1));
  std::string last2 = labels[labels.size() - 2] + "." + labels.back();
  for (const char* suffix : kMultiLabelSuffixes) {
    if (last2 == suffix) {
      return labels[labels.size() - 3] + "." + last2;
    }
  }
  return last2;
}

bool ends_with_labels(std::string_view name, std::string_view suffix) {
  if (name.size() == suffix.size()) return iequals(name, suffix);
  if (name.size() < suffix.size() + 1) return false;
  if (!iequals(name.substr(name.size() - suffix.size()), suffix)) return false;
  return name[name.size() - suffix.size() - 1] == '.';
}

// --- misc ---------------------------------------------------------------

double char_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : s) ++counts[c];
  double entropy = 0.0;
  const double n = static_cast<double>(s.size());
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / n;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

std::string hex_digest(const unsigned char* data, std::size_t len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(hex[data[i] >> 4]);
    out.push_back(hex[data[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  return hex_digest(digest, len);
}

namespace {
constexpr std::string_view kB64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
} // namespace

std::string base64_encode(std::string_view data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t n = (static_cast<unsigned char>(data[i]) << 16) |
                      (static_cast<unsigned char>(data[i + 1]) << 8) |
                      static_cast<unsigned char>(data[i + 2]);
    out.push_back(kB64Alphabet[(n >> 18) & 63]);
    out.push_back(kB64Alphabet[(n >> 12) & 63]);
    out.push_back(kB64Alphabet[(n >> 6) & 63]);
    out.push_back(kB64Alphabet[n & 63]);
  }
  std::size_t rem = data.size() - i;
  if (rem == 1) {
    std::uint32_t n = static_cast<unsigned char>(data[i]) << 16;
    out.push_back(kB64Alphabet[(n >> 18) & 63]);
    out.push_back(kB64Alphabet[(n >> 12) & 63]);
    out += "==";
  } else if (rem == 2) {
    std::uint32_t n = (static_cast<unsigned char>(data[i]) << 16) |
                      (static_cast<unsigned char>(data[i + 1]) << 8);
    out.push_back(kB64Alphabet[(n >> 18) & 63]);
    out.push_back(kB64Alphabet[(n >> 12) & 63]);
    out.push_back(kB64Alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::optional<std::string> base64_decode(std::string_view text) {
  std::array<std::int8_t, 256> rev;
  rev.fill(-1);
  for (std::size_t i = 0; i < kB64Alphabet.size(); ++i)
    rev[static_cast<unsigned char>(kB64Alphabet[i])] =
        static_cast<std::int8_t>(i);

  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  int pad = 0;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '=') {
      ++pad;
      continue;
    }
    if (pad > 0) return std::nullopt; // data after padding
    std::int8_t v = rev[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xFF));
    }
  }
  // 6 leftover bits = a lone trailing character; 4 leftover bits want two
  // pad characters, 2 leftover bits want one, none wants none.
  if (bits == 6) return std::nullopt;
  int expected_pad = bits == 4 ? 2 : bits == 2 ? 1 : 0;
  if (pad != expected_pad) return std::nullopt;
  return out;
}

// --- time ---------------------------------------------------------------

std::string format_utc(std::int64_t seconds) {
  std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

std::optional<std::int64_t> parse_utc(std::string_view text) {
  std::tm tm{};
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  std::string s(text);
  int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se);
  if (n != 6) {
    n = std::sscanf(s.c_str(), "%d-%d-%d", &y, &mo, &d);
    if (n != 3) return std::nullopt;
    h = mi = se = 0;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = se;
  std::time_t t = timegm(&tm);
  if (t == -1) return std::nullopt;
  return static_cast<std::int64_t>(t);
}

// --- CSV ------------------------------------------------------------------

std::string csv_escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::vector<std::string> csv_parse_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // trailing CR from CRLF input
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

} // namespace dsentinel::util
