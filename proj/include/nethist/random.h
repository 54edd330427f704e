#ifndef NETHIST_RANDOM_H_
#define NETHIST_RANDOM_H_

#include <cstdint>

namespace nethist {

// SplitMix64 finalizer. Used both as a seeding step and as the mixing
// function behind keyed streams.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for an independent sub-stream, e.g. restart r of a fit or replicate r
// of a Monte Carlo run.
constexpr uint64_t derive_seed(uint64_t seed, uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t index) {
  return derive_seed(derive_seed(seed, tag), index);
}

// Maps 64 random bits to the open interval (0, 1).
constexpr double bits_to_open_unit(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Counter-based uniform draw keyed by (seed, tag, a, b). The value does not
// depend on the order in which keys are queried.
constexpr double keyed_uniform(uint64_t seed, uint64_t tag, uint64_t a,
                               uint64_t b) {
  uint64_t x = splitmix64(seed ^ 0xD1B54A32D192ED03ULL);
  x = splitmix64(x ^ tag);
  x = splitmix64(x ^ a);
  x = splitmix64(x ^ (b * 0x9E3779B97F4A7C15ULL));
  return bits_to_open_unit(x);
}

// xoshiro256** with SplitMix64 seeding. The bounded-integer and real draws
// are implemented here rather than via <random> distributions so that
// streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9E3779B97F4A7C15ULL;
      word = splitmix64(s);
    }
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1).
  double uniform() { return bits_to_open_unit(next()); }

  // Uniform integer in [0, bound). bound must be positive.
  uint64_t below(uint64_t bound) {
    // Lemire's nearly-divisionless rejection method.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<uint64_t>(m);
    if (low < bound) {
      const uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  uint64_t state_[4];
};

}  // namespace nethist

#endif  // NETHIST_RANDOM_H_
