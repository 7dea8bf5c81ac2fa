#pragma once

#include <cstdint>

namespace nbspectra {

// Counter-based random streams. Every draw is a pure function of
// (key, i, j, k), so sampling a matrix entry never depends on how the
// surrounding loop is scheduled across threads.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Derive an independent stream key, e.g. one per Monte Carlo trial.
inline constexpr std::uint64_t split(std::uint64_t key, std::uint64_t stream) {
    return mix(key + kGolden * (stream + 1));
}

inline constexpr std::uint64_t word(std::uint64_t key, std::uint64_t i,
                                    std::uint64_t j, std::uint64_t k = 0) {
    std::uint64_t h = mix(key + kGolden * (i + 1));
    h = mix(h + kGolden * (j + 1));
    if (k != 0) h = mix(h + kGolden * k);
    return h;
}

/// Uniform draw in [0, 1) addressed by (i, j) plus a per-entry counter.
inline double uniform(std::uint64_t key, std::uint64_t i, std::uint64_t j,
                      std::uint64_t k = 0) {
    return static_cast<double>(word(key, i, j, k) >> 11) * 0x1.0p-53;
}

} // namespace rng
} // namespace nbspectra
