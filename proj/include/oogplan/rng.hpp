#pragma once

#include <cstdint>
#include <random>

namespace oogplan {

// splitmix64 step; used to derive independent per-trial/per-step seeds so
// batch results do not depend on scheduling.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

} // namespace oogplan
