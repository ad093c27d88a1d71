#pragma once

#include <cstdint>
#include <string_view>

namespace vocabdrift {

// Deterministic, platform-independent mixing. std::hash is deliberately
// avoided: manifests must be byte-identical across toolchains.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Maps a 64-bit hash onto the open interval (0,1); every output is an
/// exact double and never 0 or 1.
constexpr double unit_interval(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Per-document uniform draw keyed by (seed, doc id).
inline double uniform_for_id(std::uint64_t seed, std::string_view id) {
    return unit_interval(splitmix64(splitmix64(seed) ^ fnv1a64(id)));
}

/// Fresh randomness for each sampling iteration of one run.
constexpr std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(iteration)));
}

} // namespace vocabdrift
