#pragma once
// Seed derivation and portable draws.
//
// std::normal_distribution and friends are implementation-defined, so the
// conversions from raw 64-bit generator output are written out here. Every
// draw consumes a fixed number of generator outputs.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace falsikit {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for one sample, a pure function of its coordinates.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                           std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(fnv1a64(stream))) + index);
}

/// Uniform on [0, 1) with 53 random bits; one generator output.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; two generator outputs.
inline double standard_normal(Rng& rng) {
    const double u1 = 1.0 - uniform01(rng); // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace falsikit
