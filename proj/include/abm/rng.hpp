#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace abm {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to turn structured keys into well-spread seeds.
std::uint64_t mix64(std::uint64_t z);

// Sub-stream seed for (seed, tag, a, b). Filters key particle streams by (t, p) so the
// draws a particle sees do not depend on how the work is split across threads.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0);

inline Rng make_stream(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
    return Rng(derive_seed(seed, tag, a, b));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace abm
