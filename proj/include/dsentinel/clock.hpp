// Injectable time source. The collection pipeline never reads the wall clock
// directly; harness-driven runs substitute a manually advanced clock.
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

namespace dsentinel {

class Clock {
public:
  virtual ~Clock() = default;
  // Seconds since the Unix epoch (or scenario origin, for virtual clocks).
  virtual std::int64_t now() const = 0;
};

class WallClock final : public Clock {
public:
  std::int64_t now() const override;
};

class ManualClock final : public Clock {
public:
  explicit ManualClock(std::int64_t start = 0) : t_(start) {}
  std::int64_t now() const override { return t_.load(std::memory_order_relaxed); }
  void set(std::int64_t t) { t_.store(t, std::memory_order_relaxed); }

private:
  std::atomic<std::int64_t> t_;
};

} // namespace dsentinel
