#include "dsentinel/httpclient.hpp"

#include "dsentinel/util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>

namespace dsentinel::http {

namespace {

constexpr std::size_t kMaxHeaderBytes = 64 * 1024;

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                  deadline - std::chrono::steady_clock::now())
                  .count();
  return left > 0 ? static_cast<int>(left) : 0;
}

// Reads from the stream into buf until the header terminator appears, the
// cap is hit, EOF, or the deadline passes. Returns the position just past
// "\r\n\r\n", or npos.
std::size_t read_until_headers_end(net::TcpStream& stream, std::string& buf,
                                   std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    auto pos = buf.find("\r\n\r\n");
    if (pos != std::string::npos) return pos + 4;
    if (buf.size() > kMaxHeaderBytes) return std::string::npos;
    int left = remaining_ms(deadline);
    if (left == 0) return std::string::npos;
    std::uint8_t chunk[4096];
    auto n = stream.read_some(chunk, sizeof chunk, left);
    if (!n || *n == 0) return std::string::npos;
    buf.append(reinterpret_cast<const char*>(chunk), *n);
  }
}

bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::optional<std::size_t> parse_content_length(const Response& r) {
  auto v = r.header("content-length");
  if (!v) return std::nullopt;
  std::size_t len = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), len);
  if (ec != std::errc() || ptr != v->data() + v->size()) return std::nullopt;
  return len;
}

// Appends up to want bytes of entity data into out, honoring the cap.
// Returns false on timeout/EOF before want bytes arrived.
bool read_entity(net::TcpStream& stream, std::string& out, std::size_t want,
                 std::size_t cap, bool* truncated,
                 std::chrono::steady_clock::time_point deadline) {
  std::size_t got = 0;
  std::uint8_t chunk[8192];
  while (got < want) {
    int left = remaining_ms(deadline);
    if (left == 0) return false;
    auto n = stream.read_some(chunk, std::min(sizeof chunk, want - got), left);
    if (!n || *n == 0) return false;
    got += *n;
    std::size_t room = cap > out.size() ? cap - out.size() : 0;
    std::size_t keep = std::min(room, *n);
    out.append(reinterpret_cast<const char*>(chunk), keep);
    if (keep < *n) *truncated = true;
  }
  return true;
}

// Reads to EOF, capped.
void read_to_eof(net::TcpStream& stream, std::string& out, std::size_t cap,
                 bool* truncated,
                 std::chrono::steady_clock::time_point deadline) {
  std::uint8_t chunk[8192];
  for (;;) {
    int left = remaining_ms(deadline);
    if (left == 0) return;
    auto n = stream.read_some(chunk, sizeof chunk, left);
    if (!n || *n == 0) return;
    std::size_t room = cap > out.size() ? cap - out.size() : 0;
    std::size_t keep = std::min(room, *n);
    out.append(reinterpret_cast<const char*>(chunk), keep);
    if (keep < *n) *truncated = true;
  }
}

// De-chunks a Transfer-Encoding: chunked body. leftover holds bytes already
// read past the headers.
void read_chunked(net::TcpStream& stream, std::string leftover, std::string& out,
                  std::size_t cap, bool* truncated,
                  std::chrono::steady_clock::time_point deadline) {
  std::string buf = std::move(leftover);
  auto need_line = [&](std::string& line) -> bool {
    for (;;) {
      auto pos = buf.find("\r\n");
      if (pos != std::string::npos) {
        line = buf.substr(0, pos);
        buf.erase(0, pos + 2);
        return true;
      }
      if (buf.size() > kMaxHeaderBytes) return false;
      int left = remaining_ms(deadline);
      if (left == 0) return false;
      std::uint8_t chunk[4096];
      auto n = stream.read_some(chunk, sizeof chunk, left);
      if (!n || *n == 0) return false;
      buf.append(reinterpret_cast<const char*>(chunk), *n);
    }
  };
  auto need_bytes = [&](std::size_t want) -> bool {
    while (buf.size() < want) {
      int left = remaining_ms(deadline);
      if (left == 0) return false;
      std::uint8_t chunk[8192];
      auto n = stream.read_some(chunk, sizeof chunk, left);
      if (!n || *n == 0) return false;
      buf.append(reinterpret_cast<const char*>(chunk), *n);
    }
    return true;
  };

  for (;;) {
    std::string size_line;
    if (!need_line(size_line)) return;
    // Chunk extensions (";...") are legal; ignore them.
    auto semi = size_line.find(';');
    if (semi != std::string::npos) size_line.resize(semi);
    std::size_t chunk_len = 0;
    auto [ptr, ec] = std::from_chars(
        size_line.data(), size_line.data() + size_line.size(), chunk_len, 16);
    if (ec != std::errc() || ptr == size_line.data()) return;
    if (chunk_len == 0) return; // terminal chunk; trailers ignored
    if (!need_bytes(chunk_len + 2)) {
      // Keep whatever arrived.
      std::size_t have = std::min(buf.size(), chunk_len);
      std::size_t room = cap > out.size() ? cap - out.size() : 0;
      out.append(buf.data(), std::min(room, have));
      if (have > room) *truncated = true;
      return;
    }
    std::size_t room = cap > out.size() ? cap - out.size() : 0;
    std::size_t keep = std::min(room, chunk_len);
    out.append(buf.data(), keep);
    if (keep < chunk_len) *truncated = true;
    buf.erase(0, chunk_len + 2); // data + CRLF
  }
}

bool parse_status_line(std::string_view line, Response& out) {
  // "HTTP/1.1 200 OK" — reason may be empty.
  if (!line.starts_with("HTTP/1.")) return false;
  auto sp1 = line.find(' ');
  if (sp1 == std::string_view::npos) return false;
  auto sp2 = line.find(' ', sp1 + 1);
  auto code_text = line.substr(sp1 + 1, sp2 == std::string_view::npos
                                            ? std::string_view::npos
                                            : sp2 - sp1 - 1);
  int code = 0;
  auto [ptr, ec] =
      std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
  if (ec != std::errc() || ptr != code_text.data() + code_text.size() ||
      code < 100 || code > 599)
    return false;
  out.status = code;
  if (sp2 != std::string_view::npos)
    out.reason = std::string(line.substr(sp2 + 1));
  return true;
}

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 ||
         status == 308;
}

// Resolves a Location value against the current host/path. Returns the next
// (host, port_override, path); port_override 0 means "keep dialing the same
// place".
struct NextHop {
  std::string host;
  std::uint16_t port = 0;
  std::string path;
  bool https = false;
};

std::optional<NextHop> next_hop(const std::string& location,
                                const std::string& host,
                                const std::string& path) {
  if (location.empty()) return std::nullopt;
  if (location.starts_with("http://") || location.starts_with("https://")) {
    auto url = parse_http_url(location);
    if (!url) return std::nullopt;
    NextHop hop;
    hop.host = url->host;
    hop.port = url->explicit_port ? url->port : 0;
    hop.path = url->path;
    hop.https = url->scheme == "https";
    return hop;
  }
  NextHop hop;
  hop.host = host;
  if (location.front() == '/') {
    hop.path = location;
  } else {
    // Relative reference: resolve against the current path's directory.
    auto slash = path.rfind('/');
    hop.path = (slash == std::string::npos ? std::string("/")
                                           : path.substr(0, slash + 1)) +
               location;
  }
  return hop;
}

} // namespace

std::optional<std::string> Response::header(const std::string& name) const {
  for (const auto& [k, v] : headers) {
    if (iequal(k, name)) return v;
  }
  return std::nullopt;
}

std::optional<HttpUrl> parse_http_url(const std::string& text) {
  HttpUrl url;
  std::string rest;
  if (text.starts_with("http://")) {
    url.scheme = "http";
    url.port = 80;
    rest = text.substr(7);
  } else if (text.starts_with("https://")) {
    url.scheme = "https";
    url.port = 443;
    rest = text.substr(8);
  } else {
    return std::nullopt;
  }
  auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  url.path = slash == std::string::npos ? "/" : rest.substr(slash);
  if (authority.empty()) return std::nullopt;

  auto take_port = [&url](std::string_view text) -> bool {
    int port = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
    if (ec != std::errc() || ptr != text.data() + text.size() || port < 1 ||
        port > 65535)
      return false;
    url.port = static_cast<std::uint16_t>(port);
    url.explicit_port = true;
    return true;
  };

  if (authority.front() == '[') { // [v6] or [v6]:port
    auto close = authority.find(']');
    if (close == std::string::npos || close < 2) return std::nullopt;
    url.host = authority.substr(1, close - 1);
    if (close + 1 < authority.size()) {
      if (authority[close + 1] != ':' || close + 2 >= authority.size())
        return std::nullopt;
      if (!take_port(std::string_view(authority).substr(close + 2)))
        return std::nullopt;
    }
  } else {
    auto colon = authority.find(':');
    if (colon == std::string::npos) {
      url.host = authority;
    } else {
      if (authority.find(':', colon + 1) != std::string::npos)
        return std::nullopt; // unbracketed v6 is not a legal URL authority
      url.host = authority.substr(0, colon);
      if (!take_port(std::string_view(authority).substr(colon + 1)))
        return std::nullopt;
    }
  }
  if (url.host.empty()) return std::nullopt;
  return url;
}

Response get_once(const net::Endpoint& at, const std::string& host,
                  const std::string& path, const ClientConfig& config) {
  Response out;
  out.final_host = host;
  out.final_path = path.empty() ? "/" : path;

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(config.timeout_ms);

  auto stream = net::TcpStream::connect(at, config.timeout_ms);
  if (!stream) return out;

  std::string request = "GET " + out.final_path +
                        " HTTP/1.1\r\n"
                        "Host: " +
                        host +
                        "\r\n"
                        "User-Agent: " +
                        config.user_agent +
                        "\r\n"
                        "Accept: */*\r\n"
                        "Connection: close\r\n\r\n";
  if (!stream->write_all(request, remaining_ms(deadline))) return out;

  std::string buf;
  auto body_start = read_until_headers_end(*stream, buf, deadline);
  if (body_start == std::string::npos) return out;

  // Status line.
  auto line_end = buf.find("\r\n");
  if (!parse_status_line(std::string_view(buf).substr(0, line_end), out))
    return out;
  out.completed = true;

  // Header block.
  std::size_t cursor = line_end + 2;
  while (cursor < body_start - 2) {
    auto eol = buf.find("\r\n", cursor);
    if (eol == std::string::npos || eol > body_start - 2) break;
    std::string_view line(buf.data() + cursor, eol - cursor);
    cursor = eol + 2;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto name = std::string(line.substr(0, colon));
    auto value = std::string(line.substr(colon + 1));
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
      value.erase(value.begin());
    while (!value.empty() && (value.back() == ' ' || value.back() == '\r'))
      value.pop_back();
    out.headers.emplace_back(std::move(name), std::move(value));
  }

  std::string leftover = buf.substr(body_start);

  auto te = out.header("transfer-encoding");
  if (te && iequal(*te, "chunked")) {
    read_chunked(*stream, std::move(leftover), out.body, config.body_cap,
                 &out.body_truncated, deadline);
    return out;
  }

  if (auto len = parse_content_length(out)) {
    std::size_t keep = std::min(leftover.size(), *len);
    std::size_t room = std::min(keep, config.body_cap);
    out.body.append(leftover.data(), room);
    if (room < keep) out.body_truncated = true;
    if (*len > keep) {
      read_entity(*stream, out.body, *len - keep, config.body_cap,
                  &out.body_truncated, deadline);
    }
    return out;
  }

  // No framing: everything until EOF is the body.
  std::size_t room = std::min(leftover.size(), config.body_cap);
  out.body.append(leftover.data(), room);
  if (room < leftover.size()) out.body_truncated = true;
  read_to_eof(*stream, out.body, config.body_cap, &out.body_truncated, deadline);
  return out;
}

Response get(const net::Endpoint& at, const std::string& host,
             const std::string& path, const ClientConfig& config,
             const Dialer& dialer) {
  net::Endpoint target = at;
  std::string cur_host = host;
  std::string cur_path = path.empty() ? "/" : path;
  int wire = 0;

  for (int hop = 0;; ++hop) {
    Response r = get_once(target, cur_host, cur_path, config);
    wire += 1;
    r.wire_requests = wire;
    if (!r.completed || !is_redirect(r.status) || hop >= config.max_redirects)
      return r;
    auto loc = r.header("location");
    if (!loc) return r;
    auto hopinfo = next_hop(*loc, cur_host, cur_path);
    if (!hopinfo || hopinfo->https) return r; // TLS endpoints end the chain
    if (hopinfo->host != cur_host && dialer) {
      auto dialed = dialer(hopinfo->host);
      if (!dialed) return r;
      target = *dialed;
    }
    // Without a dialer the endpoint is kept: a virtual-hosting frontend
    // serves every name it redirects to. An explicit port is honored
    // either way.
    if (hopinfo->port != 0) target.port = hopinfo->port;
    cur_host = hopinfo->host;
    cur_path = hopinfo->path;
  }
}

} // namespace dsentinel::http
