#pragma once

// SplitMix64. Spelled out here (instead of <random> distributions) so the
// stream is identical across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace specprior {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    double angle() { return uniform(0.0, 2 * std::numbers::pi); }

private:
    std::uint64_t state_;
};

/// Child seed for stream `index` of `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    SplitMix64 g(base ^ (index * 0xD1B54A32D192ED03ULL));
    return g.next();
}

/// Per-s seed of the sweep: base XOR (s_index * odd constant).
inline std::uint64_t s_point_seed(std::uint64_t base, std::uint64_t s_index) {
    return base ^ (s_index * 0x9E3779B97F4A7C15ULL);
}

}  // namespace specprior
