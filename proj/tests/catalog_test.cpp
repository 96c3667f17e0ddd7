#include "doctest.h"

#include "dsentinel/catalog.hpp"

#include <random>

using namespace dsentinel;
using namespace dsentinel::catalog;

namespace {

// Minimal provider feed fixtures in the shapes the providers publish.
const char* kAwsFeed = R"({
  "syncToken": "1693600000",
  "createDate": "2023-09-01-20-00-00",
  "prefixes": [
    {"ip_prefix": "3.5.140.0/22", "region": "ap-northeast-2", "service": "S3"},
    {"ip_prefix": "52.94.76.0/22", "region": "us-west-2", "service": "AMAZON"},
    {"ip_prefix": "not-a-cidr", "region": "x", "service": "S3"},
    {"ip_prefix": "13.34.0.0/16", "region": "eu-west-1", "service": "EC2"}
  ],
  "ipv6_prefixes": [
    {"ipv6_prefix": "2600:1f00::/24", "region": "us-east-1", "service": "AMAZON"}
  ]
})";

const char* kAzureFeed = R"({
  "changeNumber": 213,
  "cloud": "Public",
  "values": [
    {
      "name": "AppService.WestEurope",
      "properties": {
        "changeNumber": 11,
        "region": "westeurope",
        "systemService": "AzureAppService",
        "addressPrefixes": ["13.69.0.0/17", "2603:1020:206::/48"]
      }
    },
    {
      "name": "AzureTrafficManager",
      "properties": {
        "systemService": "AzureTrafficManager",
        "addressPrefixes": ["13.65.92.252/32"]
      }
    }
  ]
})";

const char* kGoogleFeed = R"({
  "syncToken": "1693600001",
  "creationTime": "2023-09-01T10:00:00",
  "prefixes": [
    {"ipv4Prefix": "34.80.0.0/15", "service": "Google Cloud", "scope": "asia-east1"},
    {"ipv6Prefix": "2600:1900:4000::/44", "service": "Google Cloud", "scope": "us-central1"}
  ]
})";

CloudCatalog load_all() {
  return load_provider_ranges({
      {"aws", kAwsFeed},
      {"azure", kAzureFeed},
      {"google", kGoogleFeed},
  });
}

} // namespace

TEST_CASE("empty document map is rejected") {
  CHECK_THROWS_AS(load_provider_ranges({}), EmptyFeedError);
}

TEST_CASE("unrecognizable documents name the offending provider") {
  try {
    load_provider_ranges({{"aws", "<html>not a feed</html>"}});
    FAIL("expected FeedFormatError");
  } catch (const FeedFormatError& e) {
    CHECK(e.provider == "aws");
  }
}

TEST_CASE("feeds that parse to nothing are empty-feed errors") {
  CHECK_THROWS_AS(load_provider_ranges({{"aws", R"({"prefixes": []})"}}),
                  EmptyFeedError);
}

TEST_CASE("aws feed entries land in the catalog with service kinds") {
  auto cat = load_all();
  auto hit = cat.match_ip(IpAddr::v4(3, 5, 141, 7));
  REQUIRE(hit.has_value());
  CHECK(hit->provider == "aws");
  CHECK(hit->tag == "S3");
  CHECK(hit->service_kind == ServiceKind::storage);

  // Malformed row was skipped, not fatal.
  CHECK(cat.skipped_entries().at("aws") == 1);

  // Brute-force oracle: the match must agree with a linear containment scan.
  const IpRange* widest = nullptr;
  for (const auto& r : cat.ip_ranges()) {
    if (!r.block.contains(IpAddr::v4(3, 5, 141, 7))) continue;
    if (!widest || r.block.prefix_len < widest->block.prefix_len) widest = &r;
  }
  REQUIRE(widest != nullptr);
  // No nesting around this block in the fixture, so longest == only.
  CHECK(widest->block == hit->block);
}

TEST_CASE("azure and google feeds parse including v6 blocks") {
  auto cat = load_all();

  auto webapp = cat.match_ip(IpAddr::v4(13, 69, 100, 1));
  REQUIRE(webapp.has_value());
  CHECK(webapp->provider == "azure");
  CHECK(webapp->service_kind == ServiceKind::web_app);

  auto tm = cat.match_ip(IpAddr::v4(13, 65, 92, 252));
  REQUIRE(tm.has_value());
  CHECK(tm->service_kind == ServiceKind::traffic_manager);

  auto g = cat.match_ip(IpAddr::v4(34, 81, 1, 1));
  REQUIRE(g.has_value());
  CHECK(g->provider == "google");

  auto v6 = IpAddr::parse("2603:1020:206::99");
  REQUIRE(v6.has_value());
  auto azure6 = cat.match_ip(*v6);
  REQUIRE(azure6.has_value());
  CHECK(azure6->provider == "azure");

  CHECK(cat.feed_timestamps().at("google") == "2023-09-01T10:00:00");
}

TEST_CASE("loopback and unrouted space match nothing") {
  auto cat = load_all();
  CHECK_FALSE(cat.match_ip(IpAddr::v4(127, 0, 0, 1)).has_value());
  CHECK_FALSE(cat.match_ip(IpAddr::v4(192, 168, 1, 1)).has_value());
}

TEST_CASE("nested blocks resolve to the longest prefix") {
  // Ranges supplied through the normalized CSV form.
  std::string csv =
      "provider,service_kind,pattern,user_nameable\r\n"
      "aws,unknown,10.0.0.0/8,false\r\n"
      "aws,storage,10.1.0.0/16,false\r\n"
      "aws,vm,10.1.2.0/24,false\r\n";
  auto cat = load_provider_ranges({{"fixture", csv}});

  auto deep = cat.match_ip(IpAddr::v4(10, 1, 2, 3));
  REQUIRE(deep.has_value());
  CHECK(deep->service_kind == ServiceKind::vm);
  CHECK(deep->block.prefix_len == 24);

  auto mid = cat.match_ip(IpAddr::v4(10, 1, 9, 9));
  REQUIRE(mid.has_value());
  CHECK(mid->service_kind == ServiceKind::storage);

  auto shallow = cat.match_ip(IpAddr::v4(10, 200, 0, 1));
  REQUIRE(shallow.has_value());
  CHECK(shallow->service_kind == ServiceKind::unknown);
}

TEST_CASE("identical prefixes from two feeds: first-loaded provider wins") {
  std::string a = "provider,service_kind,pattern,user_nameable\r\n"
                  "aws,storage,198.18.0.0/15,false\r\n";
  std::string b = "provider,service_kind,pattern,user_nameable\r\n"
                  "azure,web_app,198.18.0.0/15,false\r\n";
  // std::map iterates keys in order, so "1-aws" loads before "2-azure".
  auto cat = load_provider_ranges({{"1-aws", a}, {"2-azure", b}});
  auto hit = cat.match_ip(IpAddr::v4(198, 18, 5, 5));
  REQUIRE(hit.has_value());
  CHECK(hit->provider == "aws");
}

TEST_CASE("match_ip agrees with a linear scan over random addresses") {
  auto cat = load_all();
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 10000; ++i) {
    IpAddr addr = IpAddr::v4(static_cast<std::uint8_t>(byte(rng)),
                             static_cast<std::uint8_t>(byte(rng)),
                             static_cast<std::uint8_t>(byte(rng)),
                             static_cast<std::uint8_t>(byte(rng)));
    const IpRange* oracle = nullptr;
    for (const auto& r : cat.ip_ranges()) {
      if (!r.block.contains(addr)) continue;
      if (!oracle || r.block.prefix_len > oracle->block.prefix_len) oracle = &r;
    }
    auto got = cat.match_ip(addr);
    if (oracle == nullptr) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(got->block == oracle->block);
    }
  }
}

TEST_CASE("builtin suffix table answers the canonical lookups") {
  auto cat = builtin_catalog();

  auto azure = cat.match_suffix("example.azurewebsites.net");
  REQUIRE(azure.has_value());
  CHECK(azure->service.provider == "azure");
  CHECK(azure->service.service_kind == ServiceKind::web_app);
  CHECK(azure->freetext == "example");
  CHECK(azure->service.user_nameable);

  CHECK_FALSE(cat.match_suffix("foo.com").has_value());

  auto s3 = cat.match_suffix("shop.s3-website.eu-west-1.amazonaws.com");
  REQUIRE(s3.has_value());
  CHECK(s3->service.provider == "aws");
  CHECK(s3->service.service_kind == ServiceKind::storage);
  CHECK(s3->freetext == "shop");
  CHECK(s3->region == "eu-west-1");

  // Dash-style S3 website endpoint.
  auto s3dash = cat.match_suffix("shop.s3-website-us-east-1.amazonaws.com");
  REQUIRE(s3dash.has_value());
  CHECK(s3dash->service.service_kind == ServiceKind::storage);
  CHECK(s3dash->region == "us-east-1");

  auto beanstalk = cat.match_suffix("myapp.eu-central-1.elasticbeanstalk.com");
  REQUIRE(beanstalk.has_value());
  CHECK(beanstalk->service.service_kind == ServiceKind::orchestration);
  CHECK(beanstalk->freetext == "myapp");

  auto heroku = cat.match_suffix("calm-brook-1234.herokuapp.com");
  REQUIRE(heroku.has_value());
  CHECK(heroku->service.provider == "heroku");

  auto netlify = cat.match_suffix("my-site.netlify.app");
  REQUIRE(netlify.has_value());
  CHECK(netlify->service.provider == "netlify");
}

TEST_CASE("pantheon environment prefixes are part of the pattern") {
  auto cat = builtin_catalog();
  for (const char* env : {"test", "dev", "live"}) {
    auto m = cat.match_suffix(std::string(env) + "-mysite.pantheonsite.io");
    REQUIRE(m.has_value());
    CHECK(m->service.provider == "pantheon");
    CHECK(m->service.service_kind == ServiceKind::cms);
    CHECK(m->freetext == "mysite");
  }
  // Without a recognized environment prefix the name is not a platform URL.
  CHECK_FALSE(cat.match_suffix("mysite.pantheonsite.io").has_value());
  CHECK_FALSE(cat.match_suffix("staging-mysite.pantheonsite.io").has_value());
}

TEST_CASE("generic amazonaws suffix yields the less specific row") {
  auto cat = builtin_catalog();
  auto m = cat.match_suffix("queue.fifo.sqs.amazonaws.com");
  REQUIRE(m.has_value());
  CHECK(m->service.suffix_pattern == "[freetext].amazonaws.com");
  CHECK_FALSE(m->service.user_nameable);

  // But the specific s3-website row outranks it.
  auto s3 = cat.match_suffix("bucket.s3-website.ap-south-1.amazonaws.com");
  REQUIRE(s3.has_value());
  CHECK(s3->service.suffix_pattern == "[freetext].s3-website.REGION.amazonaws.com");
}

TEST_CASE("match_suffix is invariant under case and trailing dots") {
  auto cat = builtin_catalog();
  auto a = cat.match_suffix("Example.AzureWebsites.NET.");
  auto b = cat.match_suffix("example.azurewebsites.net");
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->freetext == b->freetext);
  CHECK(a->service.suffix_pattern == b->service.suffix_pattern);
}

TEST_CASE("match_suffix rejects invalid names") {
  auto cat = builtin_catalog();
  CHECK_THROWS_AS(cat.match_suffix(""), InputError);
  CHECK_THROWS_AS(cat.match_suffix("bad..name"), InputError);
  CHECK_THROWS_AS(cat.match_suffix("white space.net"), InputError);
}

TEST_CASE("label-boundary safety over a near-miss corpus") {
  auto cat = builtin_catalog();
  const char* misses[] = {
      "notazurewebsites.net",
      "xazurewebsites.net",
      "fooazurewebsites.net",
      "azurewebsites.net.evil.com",
      "example.azurewebsites.net.evil.com",
      "myherokuapp.com",
      "example.herokuapp.community",
      "s3-website.eu-west-1.amazonaws.com.phish.io",
      "example.netlify.application",
      "trafficmanager.net.example.org",
  };
  for (const char* name : misses) {
    auto m = cat.match_suffix(name);
    if (m.has_value()) {
      // The only acceptable hit is a *different*, legitimately matching row
      // like [freetext].amazonaws.com — never the boundary-violating one.
      CHECK(m->service.suffix_pattern.find("azurewebsites") == std::string::npos);
      CHECK(m->service.suffix_pattern.find("herokuapp") == std::string::npos);
      CHECK(m->service.suffix_pattern.find("netlify.app") == std::string::npos);
    }
  }
  // Generated near-misses: glue one character onto every builtin suffix's
  // first fixed label, which must never match that same row (a broader row
  // like [freetext].amazonaws.com may still claim the name).
  for (const auto& svc : cat.services()) {
    auto pat = svc.suffix_pattern;
    auto dot = pat.find('.');
    std::string fixed = pat.substr(dot + 1);
    if (fixed.find("REGION") != std::string::npos) continue;
    auto m = cat.match_suffix("x" + fixed);
    if (m.has_value()) CHECK(m->service.suffix_pattern != svc.suffix_pattern);
  }
}

TEST_CASE("the bare suffix itself is not a match (needs a freetext label)") {
  auto cat = builtin_catalog();
  CHECK_FALSE(cat.match_suffix("azurewebsites.net").has_value());
  CHECK_FALSE(cat.match_suffix("herokuapp.com").has_value());
}

TEST_CASE("user_nameable is true exactly for the free-text service rows") {
  auto cat = builtin_catalog();
  std::size_t nameable = 0;
  for (const auto& svc : cat.services()) {
    bool expected =
        svc.suffix_pattern == "[freetext].azurewebsites.net" ||
        svc.suffix_pattern == "[freetext].trafficmanager.net" ||
        svc.suffix_pattern == "[freetext].cloudapp.net" ||
        svc.suffix_pattern == "[freetext].azureedge.net" ||
        svc.suffix_pattern == "[freetext].REGION.cloudapp.azure.com" ||
        svc.suffix_pattern == "[freetext].sip.azurewebsites.windows.net" ||
        svc.suffix_pattern == "[freetext].s3-website.REGION.amazonaws.com" ||
        svc.suffix_pattern == "[freetext].s3-website-REGION.amazonaws.com" ||
        svc.suffix_pattern == "[freetext].REGION.elasticbeanstalk.com" ||
        svc.suffix_pattern == "[freetext].herokuapp.com" ||
        svc.suffix_pattern == "[test-|dev-|live-][freetext].pantheonsite.io" ||
        svc.suffix_pattern == "[freetext].netlify.app";
    CHECK(svc.user_nameable == expected);
    if (svc.user_nameable) ++nameable;
  }
  CHECK(nameable == 12);
}

TEST_CASE("normalized CSV rows merge with the builtin table") {
  std::string csv =
      "provider,service_kind,pattern,user_nameable\r\n"
      "azure,web_app,[freetext].azurewebsites.net,user_nameable=true\r\n"
      "wordpress,cms,[freetext].wordpress.com,true\r\n"
      "aws,storage,3.5.140.0/22,false\r\n";
  auto cat = load_provider_ranges({{"custom", csv}});

  // Duplicate of a builtin row: dropped, first wins.
  std::size_t azure_rows = 0;
  for (const auto& svc : cat.services()) {
    if (svc.suffix_pattern == "[freetext].azurewebsites.net") ++azure_rows;
  }
  CHECK(azure_rows == 1);

  auto wp = cat.match_suffix("myblog.wordpress.com");
  REQUIRE(wp.has_value());
  CHECK(wp->service.provider == "wordpress");
  CHECK(wp->service.user_nameable);

  CHECK(cat.match_ip(IpAddr::v4(3, 5, 141, 7)).has_value());
}

TEST_CASE("multi-label freetext is captured whole") {
  auto cat = builtin_catalog();
  auto m = cat.match_suffix("a.b.azurewebsites.net");
  REQUIRE(m.has_value());
  CHECK(m->freetext == "a.b");
}
