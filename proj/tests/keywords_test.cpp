#include "doctest.h"

#include "dsentinel/keywords.hpp"

#include "corpus.hpp"

#include <algorithm>
#include <map>
#include <random>

using namespace dsentinel;
using namespace dsentinel::keywords;

TEST_CASE("meta keyword entries tokenize per entry, with n-grams inside") {
  std::string page =
      "<html><head><meta name=\"keywords\" content=\"slot, judi online\">"
      "</head><body></body></html>";
  auto kw = extract_keywords(page);
  // "slot" and "judi online" are separate entries: no "slot judi" bigram.
  CHECK(kw == std::vector<std::string>{"slot", "judi", "judi online",
                                       "online"});
}

TEST_CASE("an empty document yields no keywords") {
  CHECK(extract_keywords("").empty());
  CHECK(extract_keywords("<html><body><p>plain body text only</p></body>"
                         "</html>")
            .empty()); // body prose is not an extraction field
}

TEST_CASE("the gambling fixture carries the expected phrases") {
  std::mt19937 rng(7);
  auto kw = extract_keywords(fixtures::gambling_page(rng));
  auto has = [&](std::string_view term) {
    return std::find(kw.begin(), kw.end(), term) != kw.end();
  };
  CHECK(has("situs judi"));
  CHECK(has("judi"));
  CHECK(has("gacor"));
  CHECK(has("slot gacor"));
  CHECK(has("judi slot online"));
}

TEST_CASE("stopwords are dropped before n-grams are formed") {
  std::string page =
      "<html><head><title>The List of the Slots</title></head><body>"
      "</body></html>";
  auto kw = extract_keywords(page);
  CHECK(kw == std::vector<std::string>{"list", "list slots", "slots"});
}

TEST_CASE("n-grams stop at three words and dedup keeps first position") {
  std::string page = "<html><head><title>alpha beta gamma delta</title>"
                     "<meta name=\"description\" content=\"alpha beta\">"
                     "</head><body></body></html>";
  auto kw = extract_keywords(page);
  auto has = [&](std::string_view term) {
    return std::find(kw.begin(), kw.end(), term) != kw.end();
  };
  CHECK(has("alpha beta gamma"));
  CHECK(has("beta gamma delta"));
  CHECK_FALSE(has("alpha beta gamma delta"));
  // "alpha beta" from the description is a duplicate of the title bigram.
  CHECK(std::count(kw.begin(), kw.end(), std::string("alpha beta")) == 1);
  CHECK(kw.front() == "alpha");
}

TEST_CASE("headings and anchor text feed extraction; scripts never do") {
  std::string page =
      "<html><body>"
      "<h2>Weekly Specials</h2>"
      "<a href=\"/x\">order fresh bread</a>"
      "<script>var judi = 'slot gacor';</script>"
      "</body></html>";
  auto kw = extract_keywords(page);
  auto has = [&](std::string_view term) {
    return std::find(kw.begin(), kw.end(), term) != kw.end();
  };
  CHECK(has("weekly specials"));
  CHECK(has("order fresh bread"));
  CHECK_FALSE(has("judi"));
  CHECK_FALSE(has("slot gacor"));
}

TEST_CASE("utf-8 words survive tokenization") {
  std::string page = "<html><head><title>激安ブランド通販</title></head>"
                     "<body></body></html>";
  auto kw = extract_keywords(page);
  REQUIRE(!kw.empty());
  CHECK(kw.front() == "激安ブランド通販");
}

TEST_CASE("classification votes by topic lexicon") {
  CHECK(classify_content({"judi", "slot", "gacor"}).topic == Topic::gambling);
  CHECK(classify_content({}).topic == Topic::other);
  CHECK(classify_content({}).score == 0.0);
  CHECK(classify_content({"porn", "xxx", "bokep"}).topic == Topic::adult);
  CHECK(classify_content({"viagra", "online pharmacy"}).topic ==
        Topic::pharma);
  CHECK(classify_content({"backlink", "pbn", "doorway"}).topic ==
        Topic::seo_spam);
  CHECK(classify_content({"weather", "forecast", "tomorrow"}).topic ==
        Topic::other);
}

TEST_CASE("phrases outweigh single words in the vote") {
  // One two-word gambling phrase (weight 2) vs one adult word (weight 1).
  auto result = classify_content({"judi online", "porn"});
  CHECK(result.topic == Topic::gambling);
  CHECK(result.score == doctest::Approx(2.0));
}

TEST_CASE("a japanese page behind a generated sitemap is its own category") {
  PageContext context;
  context.language = "ja";
  context.sitemap_urls = 50000;
  auto result = classify_content({}, context);
  CHECK(result.topic == Topic::japanese_keyword_hack);
  CHECK(result.score >= 1.0);

  // Below the mass-generation bar the context rule stays quiet.
  context.sitemap_urls = 500;
  CHECK(classify_content({}, context).topic == Topic::other);
  CHECK(classify_content({"judi", "gacor"}, context).topic ==
        Topic::gambling);

  // Language alone is no signal.
  PageContext just_ja;
  just_ja.language = "ja";
  CHECK(classify_content({}, just_ja).topic == Topic::other);
}

TEST_CASE("keyword clustering partitions by exact set equality") {
  std::vector<Page> pages = {
      {"a.example.com", {"judi", "slot"}},
      {"b.example.org", {"slot", "judi", "judi"}}, // order/dupes ignored
      {"c.example.net", {"judi", "slot", "gacor"}},
  };
  auto clusters = cluster_by_keywords(pages);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0] ==
        std::vector<std::string>{"a.example.com", "b.example.org"});
  CHECK(clusters[1] == std::vector<std::string>{"c.example.net"});

  CHECK(cluster_by_keywords({}).empty());
}

TEST_CASE("clustering agrees with a brute-force pairwise oracle") {
  std::mt19937 rng(20240817);
  const std::vector<std::string> vocab = {"judi", "slot",  "gacor", "porn",
                                          "news", "daftar", "bola",  "agen"};
  std::vector<Page> pages;
  for (int i = 0; i < 100; ++i) {
    Page page;
    page.id = "d" + std::to_string(i) + ".example.com";
    auto n = 1 + rng() % 4;
    for (std::size_t k = 0; k < n; ++k) page.keywords.push_back(vocab[rng() % vocab.size()]);
    pages.push_back(std::move(page));
  }

  auto clusters = cluster_by_keywords(pages);

  // Partition: disjoint and covering.
  std::map<std::string, int> seen;
  for (const auto& cluster : clusters) {
    for (const auto& id : cluster) ++seen[id];
  }
  CHECK(seen.size() == pages.size());
  for (const auto& [id, count] : seen) {
    CAPTURE(id);
    CHECK(count == 1);
  }

  // Same cluster iff equal normalized keyword sets.
  auto normalized = [](const Page& page) {
    auto k = page.keywords;
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  };
  std::map<std::string, std::size_t> cluster_of;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const auto& id : clusters[c]) cluster_of[id] = c;
  }
  for (std::size_t i = 0; i < pages.size(); ++i) {
    for (std::size_t j = i + 1; j < pages.size(); ++j) {
      bool same_set = normalized(pages[i]) == normalized(pages[j]);
      bool same_cluster = cluster_of[pages[i].id] == cluster_of[pages[j].id];
      CHECK(same_set == same_cluster);
    }
  }
}

TEST_CASE("registrar span separates coordinated changes from parking") {
  std::map<std::string, std::string> registrar_of = {
      {"alpha.com", "regA"}, {"beta.org", "regB"},  {"gamma.com", "regA"},
      {"delta.com", "regC"}, {"epsilon.net", "regD"},
  };

  SUBCASE("two registrars cannot be explained by one registrar's parking") {
    auto report = registrar_span({{"www.alpha.com", "shop.beta.org"}},
                                 registrar_of);
    REQUIRE(report.clusters.size() == 1);
    CHECK(report.clusters[0].registrars.size() == 2);
    CHECK_FALSE(report.clusters[0].registrar_explainable);
    CHECK_FALSE(report.clusters[0].has_unknown_registrar);
  }

  SUBCASE("one registrar across the cluster is the parking shape") {
    auto report =
        registrar_span({{"www.alpha.com", "cdn.gamma.com"}}, registrar_of);
    REQUIRE(report.clusters.size() == 1);
    CHECK(report.clusters[0].registrar_explainable);
  }

  SUBCASE("an unmapped SLD widens the span and is flagged") {
    auto report = registrar_span({{"www.alpha.com", "x.mystery.dev"}},
                                 registrar_of);
    REQUIRE(report.clusters.size() == 1);
    CHECK(report.clusters[0].registrars.size() == 2);
    CHECK(report.clusters[0].has_unknown_registrar);
    CHECK_FALSE(report.clusters[0].registrar_explainable);
  }

  SUBCASE("singleton clusters say nothing and are skipped") {
    auto report = registrar_span({{"www.alpha.com"}}, registrar_of);
    CHECK(report.clusters.empty());
    CHECK(report.at_least.empty());
  }

  SUBCASE("histogram matches a hand count and never increases") {
    // Spans: 1, 2, 2, 3, 4 -> at_least[2]=4, [3]=2, [4]=1.
    std::vector<std::vector<std::string>> clusters = {
        {"a.alpha.com", "b.gamma.com"},                    // span 1
        {"a.alpha.com", "b.beta.org"},                     // span 2
        {"c.alpha.com", "d.delta.com"},                    // span 2
        {"e.alpha.com", "f.beta.org", "g.delta.com"},      // span 3
        {"h.alpha.com", "i.beta.org", "j.delta.com",
         "k.epsilon.net"},                                 // span 4
    };
    auto report = registrar_span(clusters, registrar_of);
    REQUIRE(report.clusters.size() == 5);
    CHECK(report.at_least.at(2) == 4);
    CHECK(report.at_least.at(3) == 2);
    CHECK(report.at_least.at(4) == 1);
    std::size_t prev = SIZE_MAX;
    for (const auto& [x, count] : report.at_least) {
      CHECK(count <= prev);
      prev = count;
    }
  }
}

TEST_CASE("histogram monotonicity holds on randomized inputs") {
  std::mt19937 rng(555);
  const std::vector<std::string> slds = {"a.com", "b.com", "c.com", "d.com",
                                         "e.com", "f.com", "g.com"};
  for (int round = 0; round < 50; ++round) {
    std::map<std::string, std::string> registrar_of;
    for (const auto& sld : slds) {
      registrar_of[sld] = "reg" + std::to_string(rng() % 4);
    }
    std::vector<std::vector<std::string>> clusters;
    auto n_clusters = 1 + rng() % 6;
    for (std::size_t c = 0; c < n_clusters; ++c) {
      std::vector<std::string> members;
      auto n_members = 1 + rng() % 5;
      for (std::size_t m = 0; m < n_members; ++m) {
        members.push_back("w" + std::to_string(m) + "." +
                          slds[rng() % slds.size()]);
      }
      clusters.push_back(std::move(members));
    }
    auto report = registrar_span(clusters, registrar_of);
    std::size_t prev = SIZE_MAX;
    for (const auto& [x, count] : report.at_least) {
      CHECK(count <= prev);
      prev = count;
    }
  }
}
