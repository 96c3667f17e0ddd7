#include "doctest.h"

#include "dsentinel/budget.hpp"
#include "dsentinel/util.hpp"

#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

using namespace dsentinel;
using namespace std::chrono;

TEST_CASE("token bucket grants its burst instantly, then paces") {
  TokenBucket bucket(50.0, 5.0);

  auto start = steady_clock::now();
  for (int i = 0; i < 5; ++i) bucket.acquire();
  auto burst_time = steady_clock::now() - start;
  CHECK(duration_cast<milliseconds>(burst_time).count() < 50);

  // The sixth token must wait for a refill (~20ms at 50/s).
  start = steady_clock::now();
  bucket.acquire();
  auto waited = duration_cast<milliseconds>(steady_clock::now() - start).count();
  CHECK(waited >= 5);
}

TEST_CASE("try_acquire never blocks") {
  TokenBucket bucket(1.0, 2.0);
  CHECK(bucket.try_acquire());
  CHECK(bucket.try_acquire());
  CHECK_FALSE(bucket.try_acquire()); // drained, refill is 1/s

  std::this_thread::sleep_for(milliseconds(1100));
  CHECK(bucket.try_acquire());
}

TEST_CASE("rate limiter serializes requests to the same host") {
  RateLimiter limiter(10000.0, 10000.0); // rate out of the way
  std::atomic<int> inside{0};
  std::atomic<int> max_inside{0};

  auto worker = [&] {
    for (int i = 0; i < 10; ++i) {
      auto slot = limiter.enter("one.example.com");
      int now = inside.fetch_add(1) + 1;
      int prev = max_inside.load();
      while (now > prev && !max_inside.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(microseconds(300));
      inside.fetch_sub(1);
    }
  };
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  CHECK(max_inside.load() == 1);
}

TEST_CASE("different hosts proceed in parallel") {
  RateLimiter limiter(10000.0, 10000.0);
  std::atomic<int> inside{0};
  std::atomic<int> max_inside{0};

  auto worker = [&](std::string host) {
    auto slot = limiter.enter(host);
    int now = inside.fetch_add(1) + 1;
    int prev = max_inside.load();
    while (now > prev && !max_inside.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(milliseconds(50));
    inside.fetch_sub(1);
  };
  std::thread a(worker, "a.example.com");
  std::thread b(worker, "b.example.com");
  a.join();
  b.join();

  CHECK(max_inside.load() == 2);
}

TEST_CASE("ledger counts by cycle and by name") {
  RequestLedger ledger;
  ledger.record("a.com", "index", 1000, 1);
  ledger.record("a.com", "sitemap", 1001, 1);
  ledger.record("b.com", "index", 1002, 1);
  ledger.record("a.com", "index", 2000, 2);

  CHECK(ledger.total() == 4);
  CHECK(ledger.in_cycle(1) == 3);
  CHECK(ledger.in_cycle(2) == 1);
  CHECK(ledger.in_cycle(7) == 0);
  CHECK(ledger.for_fqdn_in_cycle("a.com", 1) == 2);
  CHECK(ledger.for_fqdn_in_cycle("b.com", 1) == 1);
  CHECK(ledger.for_fqdn_in_cycle("b.com", 2) == 0);
}

TEST_CASE("ledger survives concurrent writers") {
  RequestLedger ledger;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&ledger, t] {
      for (int i = 0; i < 100; ++i) {
        ledger.record("h" + std::to_string(t) + ".com", "index", i,
                      static_cast<std::uint64_t>(t));
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ledger.total() == 800);
  for (std::uint64_t c = 0; c < 8; ++c) CHECK(ledger.in_cycle(c) == 100);
}

TEST_CASE("ledger round-trips through json lines") {
  RequestLedger ledger;
  ledger.record("a.com", "index", 1700000000, 3);
  ledger.record("b.com", "probe", 1700000100, 3);

  auto text = ledger.to_json_lines();
  RequestLedger reloaded;
  reloaded.load_json_lines(text);
  CHECK(reloaded.total() == 2);
  CHECK(reloaded.in_cycle(3) == 2);
  auto entries = reloaded.entries();
  CHECK(entries[0].fqdn == "a.com");
  CHECK(entries[0].kind == "index");
  CHECK(entries[0].at == 1700000000);
  CHECK(entries[1].kind == "probe");
}

TEST_CASE("ledger rejects junk input") {
  RequestLedger ledger;
  CHECK_THROWS_AS(ledger.load_json_lines("{\"fqdn\": \"a.com\"}\n"), InputError);
  CHECK_THROWS_AS(ledger.load_json_lines("not json at all\n"), InputError);
  // Blank lines are tolerated (trailing newline artifacts).
  ledger.load_json_lines("\n\n");
  CHECK(ledger.total() == 0);
}
