#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

#include "mesynth/error.hpp"

namespace mesynth {

// Counter-based deterministic randomness. Every random decision in the
// pipeline draws from a stream addressed by (global seed, purpose label,
// ordinal). Identical address means identical sequence, regardless of
// evaluation order or worker count, so parallel composition cannot perturb
// results.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t ordinal) {
        std::uint64_t h = mix64(seed ^ kGolden);
        h = mix64(h ^ fnv1a64(purpose));
        h = mix64(h ^ (ordinal * kGolden + 1));
        state_ = h;
    }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + uniform01() * (hi - lo);
    }

    // Uniform integer in [lo, hi] inclusive, unbiased via rejection.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        if (lo > hi) fail("InvalidRange", "uniform_int: lo > hi");
        std::uint64_t range = hi - lo + 1;
        if (range == 0) return next_u64();  // full 64-bit range
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return lo + v % range;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller; the spare value is cached so draws
    // stay cheap and the sequence stays a pure function of the address.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mesynth
