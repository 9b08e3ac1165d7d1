#pragma once

#include <cstdint>
#include <random>

namespace geoflock {

using Rng = std::mt19937_64;

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the independent stream `index` derived from `master`:
/// splitmix64(master + 0x9E3779B97F4A7C15 * (index + 1)).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
    return Rng(stream_seed(master, index));
}

/// Uniform in [0, 1).
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double normal01(Rng &rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

} // namespace geoflock
