// Shared string, domain-name, time and CSV helpers used across the toolkit.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dsentinel {

// Raised when a caller hands an operation malformed input (bad fqdn, bad
// document, mismatched arguments). Distinct from transient I/O failures.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

namespace util {

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Splits on any whitespace run, dropping empty tokens.
std::vector<std::string> split_ws(std::string_view s);

// --- domain names -------------------------------------------------------

// Lowercases, trims surrounding whitespace, strips one trailing dot, and
// validates label syntax (1-63 chars, letters/digits/hyphen/underscore,
// total length <= 253). Non-ASCII input is converted to its punycode form.
// Returns nullopt for anything unsalvageable.
std::optional<std::string> normalize_fqdn(std::string_view fqdn);

// UTF-8 aware conversion of a domain name to its punycode (xn--) form.
// ASCII labels pass through lowercased. Returns nullopt on malformed UTF-8
// or labels that cannot be encoded.
std::optional<std::string> idn_to_punycode(std::string_view fqdn);

std::vector<std::string> labels_of(std::string_view fqdn);

// Registrable parent of a name ("shop.example.co.uk" -> "example.co.uk").
// Uses a compact multi-label public-suffix table; falls back to the last
// two labels. Names with fewer than two labels are returned unchanged.
std::string sld_of(std::string_view fqdn);

// True when `name` equals `suffix` or ends with ".suffix" on a label
// boundary. Never matches inside a label.
bool ends_with_labels(std::string_view name, std::string_view suffix);

// --- misc ---------------------------------------------------------------

// Shannon entropy of the byte distribution of `s`, in bits per character.
// Empty input yields 0.
double char_entropy(std::string_view s);

// Standard base64 (RFC 4648, with padding).
std::string base64_encode(std::string_view data);

// Inverse of base64_encode. Whitespace is tolerated anywhere; any other
// non-alphabet byte or bad padding yields nullopt.
std::optional<std::string> base64_decode(std::string_view text);

std::string hex_digest(const unsigned char* data, std::size_t len);

// SHA-256 of `data`, as a lowercase hex string.
std::string sha256_hex(std::string_view data);

// --- time ---------------------------------------------------------------

// Seconds since the Unix epoch -> "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(std::int64_t seconds);

// Inverse of format_utc. Also accepts a bare "YYYY-MM-DD" (midnight UTC).
std::optional<std::int64_t> parse_utc(std::string_view text);

// --- CSV (RFC 4180) -----------------------------------------------------

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

// Parses one CSV line into fields, honoring quotes. No multi-line fields.
std::vector<std::string> csv_parse_line(std::string_view line);

} // namespace util
} // namespace dsentinel
