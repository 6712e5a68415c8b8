#pragma once

#include <cstdint>
#include <random>

namespace twentyq {

// std::mt19937_64 output is fixed by the standard; the distribution classes
// are not, so the mapping to indices and reals is done here.
using Rng = std::mt19937_64;

/// Unbiased integer in [0, n) by rejection. n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // 2^64 mod n values at the top of the range are rejected.
    const std::uint64_t excess = (Rng::max() % n + 1) % n;
    const std::uint64_t limit = Rng::max() - excess;
    std::uint64_t x = rng();
    while (x > limit) {
        x = rng();
    }
    return x % n;
}

/// Real in [0, 1) from the top 53 bits.
inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace twentyq
