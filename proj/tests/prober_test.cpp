#include "doctest.h"

#include "dsentinel/collector.hpp"
#include "dsentinel/prober.hpp"
#include "dsentinel/vhostserver.hpp"
#include "dsentinel/zoneserver.hpp"

using namespace dsentinel;
using namespace dsentinel::collector;
using dnswire::ResourceRecord;
using mockcloud::VhostContent;
using mockcloud::VhostServer;
using mockcloud::ZoneServer;

TEST_CASE("icmp probing without raw-socket privilege reports skipped") {
  NetProber prober;
  CHECK(prober.icmp_ping(IpAddr::v4(127, 0, 0, 1)) == Tri::skipped);
}

TEST_CASE("tcp probe distinguishes open from closed ports") {
  VhostServer server;
  auto at = server.add_listener({IpAddr::v4(127, 0, 0, 1), 0});
  server.start();

  NetProber::Options opt;
  opt.tcp_timeout_ms = 500;
  NetProber prober(opt);
  CHECK(prober.tcp_connect(at.address, at.port) == Tri::yes);
  CHECK(prober.tcp_connect(IpAddr::v4(127, 0, 0, 1), 1) == Tri::no);
}

TEST_CASE("http probe sends the fqdn as Host and records the exchange") {
  VhostServer server;
  auto at = server.add_listener({IpAddr::v4(127, 0, 0, 1), 0});
  server.start();
  server.set_vhost("probed.example.com", VhostContent::site("<html>up</html>"));

  RateLimiter limiter(1000.0, 1000.0);
  RequestLedger ledger;
  ManualClock clock(1700000000);
  NetProber::Options opt;
  opt.http_timeout_ms = 2000;
  NetProber prober(opt, &limiter, &ledger, &clock);
  prober.set_cycle(7);

  auto r = prober.http_get(at.address, at.port, "probed.example.com");
  CHECK(r.completed);
  CHECK(r.status == 200);
  CHECK(r.body == "<html>up</html>");

  REQUIRE(ledger.total() == 1);
  auto entries = ledger.entries();
  CHECK(entries[0].fqdn == "probed.example.com");
  CHECK(entries[0].kind == "probe");
  CHECK(entries[0].at == 1700000000);
  CHECK(entries[0].cycle == 7);

  // The vhost server saw the Host header, proving virtual-hosting routing.
  auto log = server.request_log();
  REQUIRE(log.size() == 1);
  CHECK(log[0] == "probed.example.com /");
}

TEST_CASE("liveness shapes a real transport can produce") {
  ZoneServer zone;
  zone.start();
  VhostServer web;
  auto at = web.add_listener({IpAddr::v4(127, 0, 0, 1), 0});
  web.start();

  catalog::CloudCatalog cat = catalog::builtin_catalog();
  ManualClock clock(1700000000);
  CollectorConfig cfg;
  cfg.resolver.endpoint = zone.endpoint();
  cfg.resolver.timeout_ms = 300;
  cfg.resolver.retry_backoff_ms = {50};
  cfg.http_port = at.port;
  Collector collector(&cat, cfg, &clock);

  NetProber::Options opt;
  opt.tcp_timeout_ms = 500;
  opt.http_timeout_ms = 1500;
  NetProber prober(opt);

  SUBCASE("web service up: (skipped, yes, yes)") {
    zone.add_record(ResourceRecord::a("up.example.com", at.address));
    web.set_vhost("up.example.com", VhostContent::site("<html>ok</html>"));
    auto r = collector.probe_liveness("up.example.com", ProbeLayers{}, &prober);
    CHECK(r.icmp_responsive == Tri::skipped);
    CHECK(r.tcp_responsive == Tri::yes);
    CHECK(r.http_responsive == Tri::yes);
    CHECK(r.http_status == 200);
  }
  SUBCASE("tcp open, http mute: (skipped, yes, no)") {
    zone.add_record(ResourceRecord::a("mute.example.com", at.address));
    auto content = VhostContent::site("unused");
    content.http_enabled = false;
    web.set_vhost("mute.example.com", content);
    auto r = collector.probe_liveness("mute.example.com", ProbeLayers{}, &prober);
    CHECK(r.tcp_responsive == Tri::yes);
    CHECK(r.http_responsive == Tri::no);
  }
  SUBCASE("nothing listening: (skipped, no, no)") {
    // Point the name at an address with no listener on the probe port.
    ZoneServer deadzone;
    deadzone.start();
    CollectorConfig dead_cfg = cfg;
    dead_cfg.resolver.endpoint = deadzone.endpoint();
    dead_cfg.http_port = 9; // discard port, nothing listens in this sandbox
    Collector dead_collector(&cat, dead_cfg, &clock);
    deadzone.add_record(ResourceRecord::a("down.example.com",
                                          IpAddr::v4(127, 0, 0, 99)));
    auto r = dead_collector.probe_liveness("down.example.com", ProbeLayers{},
                                           &prober);
    CHECK(r.tcp_responsive == Tri::no);
    CHECK(r.http_responsive == Tri::no);
  }
}

TEST_CASE("end-to-end dangling verdict against real sockets") {
  // DNS: customer name -> CNAME -> released cloud name -> A -> the
  // provider frontend. The frontend no longer has a binding for the
  // customer's Host, so its fallback answers with the provider not-found
  // page — the shape a released-but-still-resolving resource presents.
  ZoneServer zone;
  zone.start();
  VhostServer frontend;
  auto at = frontend.add_listener({IpAddr::v4(127, 0, 0, 1), 0});
  frontend.start();
  frontend.set_fallback(mockcloud::VhostPage{
      404, "text/html; charset=utf-8",
      "<html><head><title>Web App - Not Found</title></head>"
      "<body>404 Web Site not found.</body></html>",
      {}});

  zone.add_record(ResourceRecord::cname("shop.customer.com",
                                        "shop-prod.azurewebsites.net"));
  zone.add_record(ResourceRecord::a("shop-prod.azurewebsites.net", at.address));

  catalog::CloudCatalog cat = catalog::builtin_catalog();
  ManualClock clock(1700000000);
  CollectorConfig cfg;
  cfg.resolver.endpoint = zone.endpoint();
  cfg.resolver.timeout_ms = 300;
  cfg.resolver.retry_backoff_ms = {50};
  cfg.http_port = at.port;
  Collector collector(&cat, cfg, &clock);

  NetProber::Options opt;
  opt.tcp_timeout_ms = 500;
  opt.http_timeout_ms = 1500;
  RequestLedger ledger;
  NetProber prober(opt, nullptr, &ledger, &clock);
  auto fps = FingerprintSet::builtin();

  auto verdict = collector.classify_dangling("shop.customer.com", &prober, &fps);
  CHECK(verdict.cloud_pointing);
  CHECK(verdict.state == DanglingState::dangling_candidate);
  CHECK(verdict.signal == DanglingSignal::provider_fingerprint);
  REQUIRE(verdict.freetext_label.has_value());
  CHECK(*verdict.freetext_label == "shop-prod");
  CHECK(ledger.total() == 1); // exactly one HTTP request was spent

  // An attacker re-registers the resource and binds the customer's name:
  // the frontend now recognizes the Host and the verdict flips to active.
  frontend.set_vhost("shop.customer.com",
                     VhostContent::site("<html>new owner content</html>"));
  auto taken = collector.classify_dangling("shop.customer.com", &prober, &fps);
  CHECK(taken.state == DanglingState::active);
  CHECK(taken.service_available == Tri::yes);
  CHECK(ledger.total() == 2);
}
