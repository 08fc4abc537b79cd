#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace abcrl {

/// The single generator type used throughout. mt19937_64 output is fixed by the
/// standard, and the helpers below avoid the implementation-defined std
/// distributions, so seeded runs give the same numbers on every platform.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi). Returns lo when lo == hi.
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    // Lemire's multiply-shift; the bias is below 2^-64 * n, irrelevant here.
    const auto wide = static_cast<unsigned __int128>(rng()) * n;
    return static_cast<std::size_t>(wide >> 64);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/**
 * @brief Derives a child seed from a master seed and a list of keys.
 *
 * Each key is folded in with h = mix64(h ^ mix64(key)), starting from
 * h = mix64(master). The result only depends on the key values and their
 * order, so adding new cells to a sweep never changes the seeds of existing
 * cells. String keys go through hash_name() first.
 */
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(master);
    for (auto k : keys) h = mix64(h ^ mix64(k));
    return h;
}

} // namespace abcrl
