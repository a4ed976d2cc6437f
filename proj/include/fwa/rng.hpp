// SPDX-License-Identifier: Apache-2.0

#ifndef FWA_RNG_HPP
#define FWA_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fwa {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for the task identified by `keys`. Depends only on the root seed
/// and the key path, never on the order in which tasks are executed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = splitmix64(seed);
    for (auto k : keys)
        h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    return Rng(derive_seed(seed, keys));
}

// Stream tags for derive_seed key paths.
namespace stream {
inline constexpr std::uint64_t requirement = 1;
inline constexpr std::uint64_t operation = 2;
inline constexpr std::uint64_t grouping = 3;
inline constexpr std::uint64_t allocation = 4;
inline constexpr std::uint64_t dump = 5;
inline constexpr std::uint64_t selftest = 6;
} // namespace stream

} // namespace fwa

#endif
