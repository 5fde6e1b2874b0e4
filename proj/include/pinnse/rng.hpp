#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace pinnse {

// splitmix64 finalizer; used to derive independent stream keys from a base
// seed plus arbitrary tags. Stable across platforms.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline uint64_t hash_str(std::string_view s) {
    // FNV-1a 64
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Key a stream by (seed, tag, indices...). Every stochastic site in the
// workbench derives its engine this way, so parallel and serial execution
// produce identical draws.
template <typename... Ints>
uint64_t stream_key(uint64_t seed, std::string_view tag, Ints... idx) {
    uint64_t h = hash_combine(mix64(seed), hash_str(tag));
    ((h = hash_combine(h, static_cast<uint64_t>(idx))), ...);
    return h;
}

template <typename... Ints>
std::mt19937_64 make_engine(uint64_t seed, std::string_view tag, Ints... idx) {
    return std::mt19937_64(stream_key(seed, tag, idx...));
}

// Uniform in [0,1). std::uniform_real_distribution is not pinned by the
// standard, so draws go through this instead.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(eng);
}

// Standard normal via Box-Muller on pinned uniforms. Two draws per variate,
// no cached spare: reproducible regardless of call pattern.
inline double gaussian(std::mt19937_64& eng) {
    double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
    double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace pinnse
