#pragma once

#include <cstdint>
#include <random>

namespace gnnie {

// All randomness in the project goes through these helpers instead of
// std::*_distribution, whose output is implementation-defined. mt19937_64
// itself is pinned by the standard, so seeded runs reproduce everywhere.
using Rng = std::mt19937_64;

inline double rng_u01(Rng& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double rng_uniform(Rng& g, double lo, double hi) {
    return lo + (hi - lo) * rng_u01(g);
}

inline uint64_t rng_below(Rng& g, uint64_t n) {
    // Modulo bias is irrelevant at our scales; determinism is what matters.
    return n ? g() % n : 0;
}

}  // namespace gnnie
