#include "potwb/rng.hpp"

#include <cmath>

namespace potwb {

namespace {
__extension__ using uint128 = unsigned __int128;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t substream) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ stream);
  key = splitmix64(key ^ (substream * 0xd1b54a32d192ed03ULL));
  return RandomStream(key);
}

double RandomStream::uniform() {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double RandomStream::exponential() { return -std::log(uniform()); }

std::size_t RandomStream::index(std::size_t n) {
  // Lemire's multiply-shift with rejection of the biased low range.
  const auto range = static_cast<std::uint64_t>(n);
  uint128 m = static_cast<uint128>(engine_()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<uint128>(engine_()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

}  // namespace potwb
