#include "emm/rng.hpp"

#include <limits>
#include <stdexcept>

namespace emm {

Stream::Stream(std::uint64_t seed, StreamId id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), 0x454d4du};
  engine_.seed(seq);
}

double Stream::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Stream::uniform_excluding_low(double lo, double hi) {
  return hi - (hi - lo) * uniform();
}

int Stream::uniform_int(int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<int>(x % span);
}

}  // namespace emm
