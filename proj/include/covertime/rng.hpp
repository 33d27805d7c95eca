#pragma once

#include <cstdint>
#include <random>

namespace covertime {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used only to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of stream `index` under `master`. Pure function, so trial results do
// not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

template <typename... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t first, Keys... rest) noexcept {
    if constexpr (sizeof...(rest) == 0) {
        return derive_seed(master, first);
    } else {
        return derive_seed(derive_seed(master, first), static_cast<std::uint64_t>(rest)...);
    }
}

inline std::size_t uniform_index(Rng& rng, std::size_t size) {
    return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
}

inline double uniform_real(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace covertime
