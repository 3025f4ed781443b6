#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace cemm {

// Deterministic randomness helpers. std::mt19937_64's raw output sequence is
// pinned by the standard; the distribution adapters are not, so conversions
// are done by hand to keep splits and fixtures reproducible across toolchains.

inline double next_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0,1)
}

inline std::uint64_t next_below(std::mt19937_64& gen, std::uint64_t n) {
    return gen() % n;
}

inline double next_normal(std::mt19937_64& gen) {
    double u1 = next_unit(gen);
    double u2 = next_unit(gen);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 gen(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(next_below(gen, i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace cemm
