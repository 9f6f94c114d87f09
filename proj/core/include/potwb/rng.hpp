#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace potwb {

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x);

/// Seedable 64-bit stream with platform-independent variates.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; conversions to uniforms and exponentials are done here rather
/// than through <random> distributions, whose algorithms are unspecified.
/// `derive` gives each (seed, stream, substream) triple an independent
/// generator, so parallel work can be split by index without sharing state.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  [[nodiscard]] static RandomStream derive(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unit-mean exponential by inversion.
  double exponential();
  /// Uniform integer in [0, n), unbiased. n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace potwb
