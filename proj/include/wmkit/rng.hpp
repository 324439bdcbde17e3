// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seeding and variate helpers shared across modules. All draws go through
// std::mt19937_64 plus manual bit manipulation so that results are identical
// on every platform (the std distributions are not pinned by the standard).
namespace wmkit::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stable per-stream seed derivation: derive_seed(s, i) != derive_seed(s, j)
// for i != j with overwhelming probability.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0x632be59bd9b4e019ull + stream * 0x9e3779b97f4a7c15ull);
    return splitmix64(state);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// Uniform double in [0, 1) using the top 53 bits of the engine output.
inline double uniform_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(rng);
}

// Unbiased uniform index in [0, n) via rejection on the 64-bit output.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t draw = rng();
    while (draw > limit) draw = rng();
    return draw % n;
}

// Standard normal via the polar (Marsaglia) method; one value per call.
inline double normal(std::mt19937_64& rng) {
    for (;;) {
        const double u = 2.0 * uniform_double(rng) - 1.0;
        const double v = 2.0 * uniform_double(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

} // namespace wmkit::rng
