#ifndef RYDTHZ_RNG_HPP
#define RYDTHZ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rydthz {

/// Counter-based pseudorandom generator (SplitMix64 over a strided counter).
/// Every draw is a pure hash of (seed, stream, counter), so streams derived
/// from the same base seed are independent and reproducible regardless of
/// evaluation order across threads.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ mix(stream + 0x5851f42d4c957f2dULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in the open interval (0, 1); never returns 0 or 1, so logs and
  /// inverse CDFs stay finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate (rate > 0).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Standard normal pair via Box-Muller (no library distribution, so the
  /// byte stream is identical on every platform).
  void normal_pair(double& z0, double& z1) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

/// Stable stream id from an operation tag, for per-operation derived seeds.
inline std::uint64_t stream_id(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rydthz

#endif  // RYDTHZ_RNG_HPP
