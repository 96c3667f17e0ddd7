// Small HTTP/1.1 client for liveness probing and snapshot fetching. Speaks
// exactly what the pipeline needs: GET with an explicit Host header (virtual
// hosting is the whole point), bounded redirect following, bounded body
// reads, Content-Length / chunked / read-to-EOF framing.
#pragma once

#include "dsentinel/net.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dsentinel::http {

struct Response {
  // True once a status line was parsed — the definition of a "completed
  // HTTP exchange". Body/headers may still be partial if the peer died
  // mid-stream; status stays trustworthy.
  bool completed = false;
  int status = 0;
  std::string reason;
  std::vector<std::pair<std::string, std::string>> headers; // as received
  std::string body;
  bool body_truncated = false; // cap reached, remainder discarded
  int wire_requests = 1;       // requests actually sent (redirect hops)
  std::string final_host;      // Host header of the last hop
  std::string final_path;

  // Case-insensitive header lookup; first match wins.
  std::optional<std::string> header(const std::string& name) const;
};

struct ClientConfig {
  int timeout_ms = 10000;              // whole-exchange deadline, per hop
  std::size_t body_cap = 2 * 1024 * 1024;
  int max_redirects = 3;
  std::string user_agent = "dsentinel/0.1";
};

// Where a named host lives. Redirect following uses this to re-dial when a
// Location header names a different host; returning nullopt stops the
// chain at the redirect response itself.
using Dialer = std::function<std::optional<net::Endpoint>(const std::string& host)>;

// One GET, no redirect following. completed=false means no status line
// arrived (refused, reset, or silent peer).
Response get_once(const net::Endpoint& at, const std::string& host,
                  const std::string& path, const ClientConfig& config = {});

// GET following up to config.max_redirects redirects (301/302/303/307/308
// with a Location). Relative Locations stay on the same endpoint; absolute
// http:// Locations re-dial through the dialer (or stay on the same
// endpoint when none is given). https Locations end the chain — the
// response in hand is returned unfollowed.
Response get(const net::Endpoint& at, const std::string& host,
             const std::string& path, const ClientConfig& config = {},
             const Dialer& dialer = nullptr);

// Parsed absolute http URL; used for Location handling and exposed for
// reuse. Rejects anything that is not http:// or https://.
struct HttpUrl {
  std::string scheme; // "http" or "https"
  std::string host;
  std::uint16_t port = 80;          // scheme default unless explicit_port
  bool explicit_port = false;       // a ":port" was present in the authority
  std::string path = "/";
};
std::optional<HttpUrl> parse_http_url(const std::string& text);

} // namespace dsentinel::http
