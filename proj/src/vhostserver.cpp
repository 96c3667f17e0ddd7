#include "dsentinel/vhostserver.hpp"

#include "dsentinel/util.hpp"

#include <algorithm>
#include <cctype>

namespace dsentinel::mockcloud {

namespace {

constexpr std::size_t kMaxRequestBytes = 64 * 1024;
constexpr int kIoTimeoutMs = 5000;

std::string_view reason_for(int status) {
  switch (status) {
    case 200: return "OK";
    case 301: return "Moved Permanently";
    case 302: return "Found";
    case 304: return "Not Modified";
    case 307: return "Temporary Redirect";
    case 308: return "Permanent Redirect";
    case 400: return "Bad Request";
    case 403: return "Forbidden";
    case 404: return "Not Found";
    case 405: return "Method Not Allowed";
    case 410: return "Gone";
    case 500: return "Internal Server Error";
    case 503: return "Service Unavailable";
    default: return "Response";
  }
}

std::string render_head(const VhostPage& page) {
  std::string out = "HTTP/1.1 " + std::to_string(page.status) + " " +
                    std::string(reason_for(page.status)) + "\r\n";
  out += "Content-Type: " + page.content_type + "\r\n";
  out += "Content-Length: " + std::to_string(page.body.size()) + "\r\n";
  for (const auto& [k, v] : page.extra_headers) out += k + ": " + v + "\r\n";
  out += "Connection: close\r\n\r\n";
  return out;
}

std::string render(const VhostPage& page) { return render_head(page) + page.body; }

VhostPage plain_error(int status, std::string text) {
  return VhostPage{status, "text/html; charset=utf-8",
                   "<html><body><p>" + std::move(text) + "</p></body></html>",
                   {}};
}

// Host header values may carry a port; routing ignores it. Names are
// lowercased, trailing dot dropped.
std::string canonical_host(std::string host) {
  if (!host.empty() && host.front() == '[') { // [v6]:port
    auto close = host.find(']');
    if (close != std::string::npos) host = host.substr(1, close - 1);
  } else {
    auto colon = host.find(':');
    if (colon != std::string::npos) host.resize(colon);
  }
  if (!host.empty() && host.back() == '.') host.pop_back();
  std::transform(host.begin(), host.end(), host.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return host;
}

} // namespace

VhostServer::~VhostServer() { stop(); }

net::Endpoint VhostServer::add_listener(const net::Endpoint& at) {
  auto listener = net::TcpListener::bind(at);
  if (!listener)
    throw InputError("cannot listen on " + at.to_string());
  auto bound = listener->local_endpoint();

  auto entry = std::make_unique<Listener>();
  entry->socket = std::move(*listener);

  std::lock_guard lock(listeners_mu_);
  if (running_.load()) {
    auto* raw = entry.get();
    entry->thread = std::thread([this, raw] { accept_loop(&raw->socket); });
  }
  listeners_.push_back(std::move(entry));
  return bound;
}

void VhostServer::start() {
  std::lock_guard lock(listeners_mu_);
  if (running_.exchange(true)) return;
  for (auto& l : listeners_) {
    if (!l->thread.joinable()) {
      auto* raw = l.get();
      l->thread = std::thread([this, raw] { accept_loop(&raw->socket); });
    }
  }
}

void VhostServer::stop() {
  if (!running_.exchange(false)) return;
  std::vector<std::unique_ptr<Listener>> listeners;
  {
    std::lock_guard lock(listeners_mu_);
    listeners.swap(listeners_);
  }
  for (auto& l : listeners) {
    if (l->thread.joinable()) l->thread.join();
  }
  reap_workers();
}

void VhostServer::reap_workers() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(listeners_mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
}

void VhostServer::set_vhost(const std::string& fqdn, VhostContent content) {
  auto name = canonical_host(fqdn);
  if (name.empty()) throw InputError("vhost name must not be empty");
  std::lock_guard lock(mu_);
  vhosts_[name] = std::move(content);
}

void VhostServer::remove_vhost(const std::string& fqdn) {
  std::lock_guard lock(mu_);
  vhosts_.erase(canonical_host(fqdn));
}

std::optional<VhostContent> VhostServer::vhost(const std::string& fqdn) const {
  std::lock_guard lock(mu_);
  auto it = vhosts_.find(canonical_host(fqdn));
  if (it == vhosts_.end()) return std::nullopt;
  return it->second;
}

void VhostServer::set_fallback(std::optional<VhostPage> page) {
  std::lock_guard lock(mu_);
  fallback_ = std::move(page);
}

std::vector<std::string> VhostServer::request_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

void VhostServer::accept_loop(net::TcpListener* listener) {
  while (running_.load()) {
    auto stream = listener->accept(100);
    if (!stream) continue;
    std::lock_guard lock(listeners_mu_);
    if (!running_.load()) return;
    workers_.emplace_back(
        [this, s = std::move(*stream)]() mutable { handle_connection(std::move(s)); });
    // Bound the zombie list: reap finished workers opportunistically.
    if (workers_.size() > 64) {
      for (auto& w : workers_) {
        if (w.joinable()) w.join();
      }
      workers_.clear();
    }
  }
}

void VhostServer::handle_connection(net::TcpStream stream) {
  std::string buf;
  std::uint8_t chunk[4096];
  std::size_t header_end = std::string::npos;
  while (buf.size() <= kMaxRequestBytes) {
    auto pos = buf.find("\r\n\r\n");
    if (pos != std::string::npos) {
      header_end = pos;
      break;
    }
    auto n = stream.read_some(chunk, sizeof chunk, kIoTimeoutMs);
    if (!n || *n == 0) return; // dead or silent client
    buf.append(reinterpret_cast<const char*>(chunk), *n);
  }
  if (header_end == std::string::npos) return;

  // Request line.
  auto line_end = buf.find("\r\n");
  std::string_view line(buf.data(), line_end);
  auto sp1 = line.find(' ');
  auto sp2 = line.rfind(' ');
  if (sp1 == std::string_view::npos || sp2 == sp1) {
    stream.write_all(render(plain_error(400, "Malformed request line.")));
    return;
  }
  std::string method(line.substr(0, sp1));
  std::string path(line.substr(sp1 + 1, sp2 - sp1 - 1));

  // Host header.
  std::string host;
  std::size_t cursor = line_end + 2;
  while (cursor < header_end) {
    auto eol = buf.find("\r\n", cursor);
    if (eol == std::string::npos || eol > header_end) break;
    std::string_view hline(buf.data() + cursor, eol - cursor);
    cursor = eol + 2;
    auto colon = hline.find(':');
    if (colon == std::string_view::npos) continue;
    std::string name(hline.substr(0, colon));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (name == "host") {
      std::string value(hline.substr(colon + 1));
      host = std::string(util::trim(value));
      break;
    }
  }

  requests_.fetch_add(1);

  if (host.empty()) {
    stream.write_all(render(plain_error(400, "A Host header is required.")));
    return;
  }

  // Routing depends only on the Host header, never on which listener the
  // connection arrived at.
  std::optional<VhostPage> page;
  std::optional<VhostPage> fallback;
  bool http_enabled = true;
  bool known_host = false;
  {
    std::lock_guard lock(mu_);
    log_.push_back(canonical_host(host) + " " + path);
    fallback = fallback_;
    auto it = vhosts_.find(canonical_host(host));
    if (it != vhosts_.end()) {
      known_host = true;
      http_enabled = it->second.http_enabled;
      auto pit = it->second.pages.find(path);
      if (pit != it->second.pages.end()) page = pit->second;
    }
  }

  if (known_host && !http_enabled) return; // close before any status line

  if (method != "GET" && method != "HEAD") {
    stream.write_all(render(plain_error(405, "Only GET is served here.")));
    return;
  }
  if (!known_host) {
    stream.write_all(render(fallback ? *fallback
                                     : plain_error(404, "No site is configured "
                                                        "for this name.")));
    return;
  }
  if (!page) {
    stream.write_all(render(plain_error(404, "No such document.")));
    return;
  }
  if (method == "HEAD") {
    stream.write_all(render_head(*page));
    return;
  }
  stream.write_all(render(*page));
}

} // namespace dsentinel::mockcloud
