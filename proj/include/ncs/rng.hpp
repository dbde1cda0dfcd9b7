#pragma once

#include <cstdint>

namespace ncs {

// Counter-based splitmix64 generator. Draws are reproducible across
// platforms and independent of call ordering between streams, which lets
// the simulator and the live endpoints see the same delay/dropout
// realization for a given (seed, stream, counter).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t counter = 0) {
    Rng r(mix(mix(seed ^ 0x9e3779b97f4a7c15ULL, stream), counter));
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Stream tags for the per-link random sources.
namespace rng_stream {
inline constexpr std::uint64_t delay = 0xDE1A;
inline constexpr std::uint64_t drop_lr = 0xD801;
inline constexpr std::uint64_t drop_rl = 0xD802;
}  // namespace rng_stream

}  // namespace ncs
