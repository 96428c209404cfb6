#pragma once

// Seed derivation. Every random stream is std::mt19937_64 seeded with
// splitmix64(base, stream), so trial k's draws never depend on trial j's.

#include <cstdint>
#include <random>

namespace emlab {

inline constexpr const char* kGeneratorName = "mt19937_64/splitmix64-derived seeds";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(base, stream));
}

}  // namespace emlab
