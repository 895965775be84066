#pragma once

#include <cstdint>

namespace metrolab {

// SplitMix64 mixing step. Used both as a standalone generator and as the
// counter-based seed-derivation hash for sweep trials.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// PCG32 (XSH-RR). Fixed algorithm so records are reproducible bit-exact
// across platforms and standard-library versions.
class Pcg32 {
  public:
    explicit Pcg32(std::uint64_t seed) {
        std::uint64_t s = seed;
        state_ = splitmix64(s);
        inc_ = splitmix64(s) | 1ull;
        next();
    }

    std::uint32_t next() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ull + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        std::uint64_t hi = next();
        std::uint64_t lo = next();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

  private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

// Counter-based stream splitting: (master, point, trial) -> independent seed.
// The scheme is part of the reproducibility contract; do not change it.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ (0x9E3779B97F4A7C15ull * (point + 1));
    std::uint64_t b = splitmix64(s);
    s = b ^ (0xC2B2AE3D27D4EB4Full * (trial + 1));
    return splitmix64(s);
}

}  // namespace metrolab
