#pragma once

#include <cstdint>
#include <random>

namespace abering {

// Deterministic uniform source. All sampling in the project goes through
// explicit inverse-CDF formulas on top of this stream instead of the
// standard-library distribution objects, whose output is not pinned by the
// standard and varies between toolchains. mt19937_64 itself is bit-exact
// everywhere, so a (seed, draw order) pair fully determines a run.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in the open interval (0, 1); never returns an endpoint.
  double uniform01() {
    const std::uint64_t bits = gen_() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace abering
