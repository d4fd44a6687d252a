#include "abm/rng.hpp"

namespace abm {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a,
                          std::uint64_t b) {
    // FNV-1a over the tag, then chain the numeric keys through the mixer.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = mix64(seed ^ mix64(h));
    z = mix64(z ^ a);
    z = mix64(z ^ (b + 0x632be59bd9b4e019ULL));
    return z;
}

}  // namespace abm
