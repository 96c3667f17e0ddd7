// Virtually-hosted HTTP/1.1 responder for the test harness: many names, any
// number of loopback listeners, routing strictly by the Host header. Pages,
// status codes, and per-name reachability are scriptable and swappable at
// runtime so scenario timelines can flip a vhost from "attacker content" to
// "provider not-found page" mid-run.
#pragma once

#include "dsentinel/net.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace dsentinel::mockcloud {

struct VhostPage {
  int status = 200;
  std::string content_type = "text/html; charset=utf-8";
  std::string body;
  std::vector<std::pair<std::string, std::string>> extra_headers;
};

struct VhostContent {
  // false = accept the TCP connection but close before sending a status
  // line: the "port open, web service mute" shape.
  bool http_enabled = true;
  std::map<std::string, VhostPage> pages; // keyed by exact path; "/" = index

  static VhostContent site(std::string index_html, int status = 200) {
    VhostContent c;
    c.pages["/"] = VhostPage{status, "text/html; charset=utf-8",
                             std::move(index_html), {}};
    return c;
  }
  VhostContent& with_sitemap(std::string xml) {
    pages["/sitemap.xml"] =
        VhostPage{200, "application/xml", std::move(xml), {}};
    return *this;
  }
  VhostContent& with_robots(std::string txt) {
    pages["/robots.txt"] = VhostPage{200, "text/plain", std::move(txt), {}};
    return *this;
  }
  VhostContent& with_page(std::string path, VhostPage page) {
    pages[std::move(path)] = std::move(page);
    return *this;
  }
};

class VhostServer {
public:
  VhostServer() = default;
  ~VhostServer();
  VhostServer(const VhostServer&) = delete;
  VhostServer& operator=(const VhostServer&) = delete;

  // Binds a listener (port 0 = ephemeral) and returns the bound endpoint.
  // Callable before or after start(); throws InputError on bind failure.
  net::Endpoint add_listener(const net::Endpoint& at);

  void start();
  void stop();

  void set_vhost(const std::string& fqdn, VhostContent content);
  void remove_vhost(const std::string& fqdn);
  std::optional<VhostContent> vhost(const std::string& fqdn) const;

  // Page served for Hosts no vhost claims. Real provider frontends answer
  // unbound names with their own "resource not found" page — which is the
  // whole reason released resources are detectable over HTTP. Reset with
  // nullopt for the neutral default.
  void set_fallback(std::optional<VhostPage> page);

  std::uint64_t request_count() const { return requests_.load(); }
  // "host path" per served request, in arrival order.
  std::vector<std::string> request_log() const;

private:
  struct Listener {
    net::TcpListener socket;
    std::thread thread;
  };

  void accept_loop(net::TcpListener* listener);
  void handle_connection(net::TcpStream stream);
  void reap_workers();

  mutable std::mutex mu_;
  std::map<std::string, VhostContent> vhosts_;
  std::optional<VhostPage> fallback_;
  std::vector<std::string> log_;

  std::mutex listeners_mu_;
  std::vector<std::unique_ptr<Listener>> listeners_;
  std::vector<std::thread> workers_;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> requests_{0};
};

} // namespace dsentinel::mockcloud
