#include "dsentinel/budget.hpp"

#include "dsentinel/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>
#include <thread>

namespace dsentinel {

using json = nlohmann::json;

TokenBucket::TokenBucket(double rate_per_s, double burst)
    : rate_(rate_per_s > 0 ? rate_per_s : 1.0),
      burst_(burst >= 1.0 ? burst : 1.0),
      tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

double TokenBucket::refill_locked() {
  auto now = std::chrono::steady_clock::now();
  std::chrono::duration<double> elapsed = now - last_;
  last_ = now;
  tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_);
  return tokens_;
}

void TokenBucket::acquire() {
  for (;;) {
    double wait_s = 0;
    {
      std::lock_guard lock(mu_);
      if (refill_locked() >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait_s = (1.0 - tokens_) / rate_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
  }
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mu_);
  if (refill_locked() >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

RateLimiter::RateLimiter(double rate_per_s, double burst)
    : bucket_(rate_per_s, burst) {}

RateLimiter::Slot RateLimiter::enter(const std::string& host) {
  std::shared_ptr<std::mutex> host_mutex;
  {
    std::lock_guard lock(map_mu_);
    auto& slot = hosts_[host];
    if (!slot) slot = std::make_shared<std::mutex>();
    host_mutex = slot;
  }
  Slot slot(std::move(host_mutex)); // serialize per host first…
  bucket_.acquire();                // …then pay the global rate.
  return slot;
}

void RequestLedger::record(std::string fqdn, std::string kind, std::int64_t at,
                           std::uint64_t cycle) {
  std::lock_guard lock(mu_);
  records_.push_back({std::move(fqdn), std::move(kind), at, cycle});
}

std::size_t RequestLedger::total() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::size_t RequestLedger::in_cycle(std::uint64_t cycle) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [&](const RequestRecord& r) { return r.cycle == cycle; }));
}

std::size_t RequestLedger::for_fqdn_in_cycle(const std::string& fqdn,
                                             std::uint64_t cycle) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [&](const RequestRecord& r) {
        return r.cycle == cycle && r.fqdn == fqdn;
      }));
}

std::vector<RequestRecord> RequestLedger::entries() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::string RequestLedger::to_json_lines() const {
  std::lock_guard lock(mu_);
  std::ostringstream out;
  for (const auto& r : records_) {
    json j{{"fqdn", r.fqdn}, {"kind", r.kind}, {"at", r.at}, {"cycle", r.cycle}};
    out << j.dump() << '\n';
  }
  return out.str();
}

void RequestLedger::load_json_lines(const std::string& text) {
  std::vector<RequestRecord> loaded;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("fqdn") ||
        !j.contains("kind") || !j.contains("at") || !j.contains("cycle")) {
      throw InputError("request ledger line " + std::to_string(line_no) +
                       " is not a ledger record");
    }
    loaded.push_back({j["fqdn"].get<std::string>(),
                      j["kind"].get<std::string>(),
                      j["at"].get<std::int64_t>(),
                      j["cycle"].get<std::uint64_t>()});
  }
  std::lock_guard lock(mu_);
  records_ = std::move(loaded);
}

} // namespace dsentinel
