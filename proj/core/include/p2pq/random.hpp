#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace p2pq {

/// Seeded 64-bit generator with portable uniform and exponential draws.
/// The std:: distributions are implementation-defined, so draws are made by
/// hand to keep seeded output identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for replication `index` of a run seeded with `seed`.
  static Rng for_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  /// Uniform on (0, 1]; never returns 0 so -log(u) is finite.
  double uniform_open0() noexcept {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace p2pq
