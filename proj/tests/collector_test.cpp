#include "doctest.h"

#include "dsentinel/collector.hpp"
#include "dsentinel/zoneserver.hpp"

#include <algorithm>

using namespace dsentinel;
using namespace dsentinel::collector;
using dnswire::ResourceRecord;
using mockcloud::ZoneServer;

namespace {

// Single-shot resolver settings so failure tests stay fast.
ResolverConfig fast_resolver(const net::Endpoint& at) {
  ResolverConfig cfg;
  cfg.endpoint = at;
  cfg.timeout_ms = 300;
  cfg.retry_backoff_ms = {50, 100};
  return cfg;
}

struct Fixture {
  ZoneServer zone;
  catalog::CloudCatalog cat = catalog::builtin_catalog();
  ManualClock clock;

  Fixture() {
    zone.start();
    clock.set(1700000000);
  }

  Collector make_collector(int workers = 4) {
    CollectorConfig cfg;
    cfg.resolver = fast_resolver(zone.endpoint());
    cfg.workers = workers;
    return Collector(&cat, cfg, &clock);
  }
};

} // namespace

TEST_CASE("resolve_chain follows a CNAME to its terminal address") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("shop.example.com",
                                           "shop.azurewebsites.net"));
  fx.zone.add_record(ResourceRecord::a("shop.azurewebsites.net",
                                       IpAddr::v4(20, 50, 60, 70)));
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("shop.example.com");
  CHECK(obs.fqdn == "shop.example.com");
  REQUIRE(obs.cname_chain.size() == 1);
  CHECK(obs.cname_chain[0] == "shop.azurewebsites.net");
  REQUIRE(obs.a_results.size() == 1);
  CHECK(obs.a_results[0] == IpAddr::v4(20, 50, 60, 70));
  CHECK_FALSE(obs.nxdomain);
  CHECK(obs.observed_at == 1700000000);
}

TEST_CASE("resolve_chain records NXDOMAIN without raising") {
  Fixture fx;
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("gone.example.com");
  CHECK(obs.nxdomain);
  CHECK(obs.cname_chain.empty());
  CHECK(obs.a_results.empty());
}

TEST_CASE("terminal name that stopped existing keeps the chain") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("app.example.com",
                                           "released.azurewebsites.net"));
  // No record at all for released.azurewebsites.net.
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("app.example.com");
  CHECK_FALSE(obs.nxdomain); // the queried name itself resolved
  REQUIRE(obs.cname_chain.size() == 1);
  CHECK(obs.cname_chain[0] == "released.azurewebsites.net");
  CHECK(obs.a_results.empty());
}

TEST_CASE("cname loop a->b->a is cut with chain [b,a]") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("a.example.com", "b.example.com"));
  fx.zone.add_record(ResourceRecord::cname("b.example.com", "a.example.com"));
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("a.example.com");
  REQUIRE(obs.cname_chain.size() == 2);
  CHECK(obs.cname_chain[0] == "b.example.com");
  CHECK(obs.cname_chain[1] == "a.example.com");
  CHECK(obs.a_results.empty());
}

TEST_CASE("self-referential cname terminates") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("self.example.com", "self.example.com"));
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("self.example.com");
  REQUIRE(obs.cname_chain.size() == 1);
  CHECK(obs.cname_chain[0] == "self.example.com");
}

TEST_CASE("chains stop at the depth cap") {
  Fixture fx;
  for (int i = 0; i < 40; ++i) {
    fx.zone.add_record(ResourceRecord::cname(
        "h" + std::to_string(i) + ".example.com",
        "h" + std::to_string(i + 1) + ".example.com"));
  }
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("h0.example.com");
  CHECK(obs.cname_chain.size() == 16);
  CHECK(obs.a_results.empty());
}

TEST_CASE("NODATA names yield an empty observation") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::caa_record(
      "txtonly.example.com", dnswire::CaaData{0, "issue", "letsencrypt.org"}));
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("txtonly.example.com");
  CHECK_FALSE(obs.nxdomain);
  CHECK(obs.cname_chain.empty());
  CHECK(obs.a_results.empty());
}

TEST_CASE("dead resolver raises a transient error, not NXDOMAIN") {
  Fixture fx;
  fx.zone.set_drop_all(true);
  auto c = fx.make_collector();
  CHECK_THROWS_AS(c.resolve_chain("anything.example.com"),
                  TransientResolutionError);
}

TEST_CASE("a dropped datagram is retried and recovers") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::a("x.example.com", IpAddr::v4(1, 2, 3, 4)));
  fx.zone.drop_next(1);
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("x.example.com");
  REQUIRE(obs.a_results.size() == 1);
}

TEST_CASE("truncated udp answers fall back to tcp") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::a("big.example.com", IpAddr::v4(9, 9, 9, 9)));
  fx.zone.set_truncate_udp(true);
  auto c = fx.make_collector();
  auto obs = c.resolve_chain("big.example.com");
  REQUIRE(obs.a_results.size() == 1);
  CHECK(obs.a_results[0] == IpAddr::v4(9, 9, 9, 9));
}

TEST_CASE("collect_fqdns keeps cloud chains and drops the rest") {
  Fixture fx;
  // a.com -> CNAME into Azure; b.com -> plain non-cloud address.
  fx.zone.add_record(ResourceRecord::cname("a.com", "example.azurewebsites.net"));
  fx.zone.add_record(ResourceRecord::a("example.azurewebsites.net",
                                       IpAddr::v4(20, 1, 1, 1)));
  fx.zone.add_record(ResourceRecord::a("b.com", IpAddr::v4(93, 184, 216, 34)));

  auto c = fx.make_collector();
  auto out = c.collect_fqdns({"a.com", "b.com"});
  REQUIRE(out.size() == 1);
  CHECK(out[0].fqdn == "a.com");
  CHECK(out[0].service.provider == "azure");
  REQUIRE(out[0].freetext.has_value());
  CHECK(*out[0].freetext == "example");
}

TEST_CASE("collect_fqdns empty input yields empty output") {
  Fixture fx;
  auto c = fx.make_collector();
  CHECK(c.collect_fqdns({}).empty());
}

TEST_CASE("collect_fqdns picks up A records inside cloud ranges") {
  Fixture fx;
  std::string csv = "provider,service_kind,pattern,user_nameable\r\n"
                    "aws,storage,52.218.0.0/17,false\r\n";
  fx.cat = catalog::load_provider_ranges({{"fixture", csv}});
  fx.zone.add_record(ResourceRecord::a("c.com", IpAddr::v4(52, 218, 30, 40)));

  auto c = fx.make_collector();
  auto out = c.collect_fqdns({"c.com"});
  REQUIRE(out.size() == 1);
  CHECK(out[0].fqdn == "c.com");
  CHECK(out[0].service.provider == "aws");
  CHECK(out[0].service.service_kind == catalog::ServiceKind::storage);
  CHECK_FALSE(out[0].freetext.has_value()); // IP matches carry no chosen name
}

TEST_CASE("collect_fqdns silently excludes NXDOMAIN names") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("live.com", "app.herokuapp.com"));
  fx.zone.add_record(ResourceRecord::a("app.herokuapp.com", IpAddr::v4(52, 1, 1, 1)));
  auto c = fx.make_collector();
  auto out = c.collect_fqdns({"live.com", "never-existed.com"});
  REQUIRE(out.size() == 1);
  CHECK(out[0].fqdn == "live.com");
}

TEST_CASE("collection is stateless: union of parts equals the whole") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("a.com", "one.azurewebsites.net"));
  fx.zone.add_record(ResourceRecord::a("one.azurewebsites.net", IpAddr::v4(20, 0, 0, 1)));
  fx.zone.add_record(ResourceRecord::cname("b.com", "two.herokuapp.com"));
  fx.zone.add_record(ResourceRecord::a("two.herokuapp.com", IpAddr::v4(52, 0, 0, 2)));
  fx.zone.add_record(ResourceRecord::a("c.com", IpAddr::v4(93, 184, 216, 34)));
  fx.zone.add_record(ResourceRecord::cname("d.com", "site.netlify.app"));
  fx.zone.add_record(ResourceRecord::a("site.netlify.app", IpAddr::v4(75, 2, 60, 5)));

  auto c = fx.make_collector();
  std::vector<std::string> x = {"a.com", "c.com"};
  std::vector<std::string> y = {"b.com", "d.com"};
  std::vector<std::string> xy = {"a.com", "c.com", "b.com", "d.com"};

  auto out_x = c.collect_fqdns(x);
  auto out_y = c.collect_fqdns(y);
  auto out_xy = c.collect_fqdns(xy);

  std::vector<CollectedName> merged = out_x;
  merged.insert(merged.end(), out_y.begin(), out_y.end());
  std::sort(merged.begin(), merged.end());
  CHECK(merged == out_xy);
}

TEST_CASE("resolver death mid-list leaves only transient skips, never candidates") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("a.com", "one.azurewebsites.net"));
  fx.zone.add_record(ResourceRecord::a("one.azurewebsites.net", IpAddr::v4(20, 0, 0, 1)));
  auto c = fx.make_collector(1);

  // First name resolves; then the resolver dies. The surviving result must
  // be only the healthy name — the dead ones are skipped, and since at
  // least one name succeeded no total failure is raised.
  auto out_healthy = c.collect_fqdns({"a.com"});
  REQUIRE(out_healthy.size() == 1);

  fx.zone.set_drop_all(true);
  CHECK_THROWS_AS(c.collect_fqdns({"x.com", "y.com"}), TransientResolutionError);
}

TEST_CASE("collected names replay to the same service tag") {
  Fixture fx;
  fx.zone.add_record(ResourceRecord::cname("a.com", "example.azurewebsites.net"));
  fx.zone.add_record(ResourceRecord::a("example.azurewebsites.net",
                                       IpAddr::v4(20, 1, 1, 1)));
  auto c = fx.make_collector();
  auto out = c.collect_fqdns({"a.com"});
  REQUIRE(out.size() == 1);

  // Re-running the match on the stored observation reproduces the tag.
  auto obs = c.resolve_chain("a.com");
  auto replay = c.cloud_match(obs);
  REQUIRE(replay.has_value());
  CHECK(replay->service.provider == out[0].service.provider);
  CHECK(replay->service.suffix_pattern == out[0].service.suffix_pattern);
}

TEST_CASE("fingerprints match provider not-found pages") {
  auto fps = FingerprintSet::builtin();
  CHECK(fps.version() == 1);

  auto azure = fps.match("azure", 404,
                         "<html><title>Web App - Not Found</title></html>");
  REQUIRE(azure.has_value());
  CHECK(azure->provider == "azure");

  // Marker matching is case-insensitive.
  CHECK(fps.match("azure", 404, "<title>WEB APP - NOT FOUND</title>").has_value());

  // Wrong status: no match.
  CHECK_FALSE(fps.match("azure", 200, "Web App - Not Found").has_value());

  // Provider hint narrows: heroku markers don't fire for azure.
  CHECK_FALSE(fps.match("azure", 404, "There's nothing here, yet.").has_value());
  CHECK(fps.match("heroku", 404, "There's nothing here, yet.").has_value());

  // Empty hint scans everything.
  CHECK(fps.match("", 404, "<Code>NoSuchBucket</Code>").has_value());

  // A benign 404 from a normal site matches nothing.
  CHECK_FALSE(fps.match("", 404, "<h1>Oops, page missing!</h1>").has_value());
}

TEST_CASE("fingerprint files parse and reject junk") {
  auto ok = FingerprintSet::from_json_text(R"({
    "version": 3,
    "fingerprints": [
      {"provider": "azure", "status": 404, "body_markers": ["gone"]}
    ]
  })");
  CHECK(ok.version() == 3);
  CHECK(ok.entries().size() == 1);

  CHECK_THROWS_AS(FingerprintSet::from_json_text("not json"), InputError);
  CHECK_THROWS_AS(FingerprintSet::from_json_text(R"({"fingerprints": []})"),
                  InputError);
  CHECK_THROWS_AS(FingerprintSet::from_json_text(R"({
    "fingerprints": [{"provider": "", "body_markers": ["x"]}]
  })"),
                  InputError);
}
