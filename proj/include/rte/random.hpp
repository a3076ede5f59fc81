#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rte {

using Engine = std::mt19937_64;

// Stream tags keep the seeds of unrelated consumers apart even when they
// share the user seed and replicate index.
enum class StreamTag : std::uint32_t {
    jitter = 1,
    bootstrap = 2,
    randomization = 3,
    simulation = 4,
    calibration = 5,
    copula_test = 6,
};

/// Independent engine for replicate `index` of the stream `tag`. Depends only
/// on its arguments, never on scheduling.
inline Engine make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Engine(seq);
}

/// Uniform on the open interval (0, 1) from the top 53 bits. Spelled out so
/// results do not depend on the standard library's distribution code.
inline double uniform_open(Engine& rng) {
    for (;;) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

/// Uniform integer in [0, bound), bound > 0, by rejection.
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t bound) {
    const std::uint64_t limit = Engine::max() - Engine::max() % bound;
    for (;;) {
        const std::uint64_t x = rng();
        if (x < limit) return x % bound;
    }
}

inline double standard_exponential(Engine& rng) { return -std::log(uniform_open(rng)); }

inline bool fair_coin(Engine& rng) { return (rng() >> 63) != 0; }

}  // namespace rte
