#include "dsentinel/clock.hpp"

#include <ctime>

namespace dsentinel {

std::int64_t WallClock::now() const {
  return static_cast<std::int64_t>(std::time(nullptr));
}

} // namespace dsentinel
