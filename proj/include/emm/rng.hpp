#pragma once

#include <cstdint>
#include <random>

namespace emm {

/// Named random streams. Each model draws from its own stream so that
/// changing one model (e.g. observation noise) never shifts the draws of
/// another (e.g. the user trajectory).
enum class StreamId : std::uint32_t {
  mobility = 1,
  tasks = 2,
  capability = 3,
  noise = 4,
  epochs = 5,
};

/// A deterministic pseudo-random stream keyed by (seed, stream id).
/// Draws are produced from raw 64-bit engine output so the sequence is
/// identical across standard libraries.
class Stream {
 public:
  Stream(std::uint64_t seed, StreamId id);

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform on (lo, hi]; never returns lo.
  double uniform_excluding_low(double lo, double hi);
  /// Uniform integer on [lo, hi].
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace emm
