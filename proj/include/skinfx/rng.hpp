#pragma once

#include <cstdint>

namespace skinfx {

// Counter-based uniform stream: every draw is a pure function of
// (seed, stream, trial, index), so parallel trials reproduce exactly
// regardless of scheduling or thread count.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class RngStream : std::uint64_t { positions = 1, gamma = 2, test = 99 };

constexpr std::uint64_t counter_bits(std::uint64_t seed, RngStream stream, std::uint64_t trial,
                                     std::uint64_t index) noexcept {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ trial);
    return splitmix64(h ^ index);
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double counter_uniform(std::uint64_t seed, RngStream stream, std::uint64_t trial,
                                 std::uint64_t index) noexcept {
    return static_cast<double>(counter_bits(seed, stream, trial, index) >> 11) * 0x1.0p-53;
}

/// Uniform on [-halfWidth, halfWidth].
constexpr double counter_symmetric(double halfWidth, std::uint64_t seed, RngStream stream,
                                   std::uint64_t trial, std::uint64_t index) noexcept {
    return halfWidth * (2.0 * counter_uniform(seed, stream, trial, index) - 1.0);
}

}  // namespace skinfx
