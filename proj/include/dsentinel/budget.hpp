// Request pacing and accounting: a global token bucket, per-host
// serialization, and an append-only ledger of every HTTP request issued.
// The ledger is what makes the "at most two requests per name per cycle"
// promise checkable after the fact instead of hoped-for.
#pragma once

#include "dsentinel/clock.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace dsentinel {

// Classic token bucket against the monotonic clock. Thread-safe.
class TokenBucket {
public:
  // rate_per_s tokens accrue per second up to burst. burst >= 1.
  TokenBucket(double rate_per_s, double burst);

  // Blocks until a token is available.
  void acquire();
  // Takes a token only if one is available right now.
  bool try_acquire();

private:
  double refill_locked();

  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

// Pacing front door for everything that talks to the network: callers hold
// a Slot for the duration of one request. Slots serialize per host; the
// shared bucket caps the global request rate.
class RateLimiter {
public:
  explicit RateLimiter(double rate_per_s = 10.0, double burst = 10.0);

  class Slot {
  public:
    Slot() = default;
    Slot(Slot&&) = default;
    Slot& operator=(Slot&&) = default;

  private:
    friend class RateLimiter;
    explicit Slot(std::shared_ptr<std::mutex> m)
        : keepalive_(std::move(m)), lock_(*keepalive_) {}

    // Declaration order matters: the lock must release before the mutex
    // it points at can be destroyed.
    std::shared_ptr<std::mutex> keepalive_;
    std::unique_lock<std::mutex> lock_;
  };

  // Blocks until the host's slot is free and a rate token is granted.
  [[nodiscard]] Slot enter(const std::string& host);

private:
  TokenBucket bucket_;
  std::mutex map_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> hosts_;
};

// One wire request. kind is a small vocabulary: "probe", "index",
// "sitemap", "robots", "redirect".
struct RequestRecord {
  std::string fqdn;
  std::string kind;
  std::int64_t at = 0;      // pipeline timestamp (virtual in harness runs)
  std::uint64_t cycle = 0;  // monitoring cycle the request belongs to
};

// Thread-safe append-only request log with the queries the budget
// assertions need. Exportable as JSON-lines for the store directory.
class RequestLedger {
public:
  void record(std::string fqdn, std::string kind, std::int64_t at,
              std::uint64_t cycle);

  std::size_t total() const;
  std::size_t in_cycle(std::uint64_t cycle) const;
  std::size_t for_fqdn_in_cycle(const std::string& fqdn,
                                std::uint64_t cycle) const;
  std::vector<RequestRecord> entries() const;

  std::string to_json_lines() const;
  // Replaces the current contents. Throws InputError on malformed input.
  void load_json_lines(const std::string& text);

private:
  mutable std::mutex mu_;
  std::vector<RequestRecord> records_;
};

} // namespace dsentinel
