#pragma once

#include <cmath>
#include <cstdint>

namespace clf {

// splitmix64: tiny counter-based generator; one instance per logical stream
// (per pixel, per trial) keeps generation order-independent and replayable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never returns 0, so -log() is always finite.
  double uniform01() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, bound); bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    return std::uint64_t((__uint128_t(next()) * bound) >> 64);
  }

  bool coin() { return next() >> 63; }

  // Exponential inter-arrival time with the given rate (events per unit time).
  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Derives an independent stream, e.g. one per pixel.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    return g.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace clf
