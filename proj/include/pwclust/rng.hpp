#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pwclust {

/// 64-bit seeded generator with derivable substreams.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Floating-point draws are produced here rather than through
/// <random> distributions so that sequences are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream derived from (seed, stream). Stream ids are stable:
  /// adding streams never changes the output of existing ones.
  static Rng substream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pwclust
