#pragma once

#include <cmath>
#include <cstdint>

namespace oppnet {

// Purpose tag for a node's random stream. Separate streams per purpose keep
// draws independent: adding a protocol or node does not perturb unrelated
// sequences, so paired A/B comparisons stay paired.
enum class RngPurpose : uint64_t {
  Phase = 1,
  Traffic = 2,
  Backoff = 3,
  Piggyback = 4,
  Loss = 5,
  AdvJitter = 6,
  Retry = 7,
};

// splitmix64 stream. Hand-rolled so that (seed, stream id, draw index) ->
// value is bit-identical on every platform; std:: distributions are not.
class Rng {
 public:
  Rng() : state_(0x9e3779b97f4a7c15ull) {}
  Rng(uint64_t seed, uint64_t node, RngPurpose purpose) {
    state_ = mix(seed ^ mix(node + 0x9e3779b97f4a7c15ull) ^
                 mix(static_cast<uint64_t>(purpose) * 0xbf58476d1ce4e5b9ull));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  uint64_t uniform_int(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  double exponential(double mean) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -mean * std::log(u);
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
};

}  // namespace oppnet
