#pragma once

#include <cstdint>
#include <vector>

namespace dnd {

/// Index type used for shapes, extents and offsets.
using index_t = std::int64_t;

namespace detail {

/// splitmix64 mixing function; maps a 64-bit value to a well-distributed one.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic uniform draw in [0, 1) for a (seed, counter) pair.
/// Independent of call order, so distributed generators can evaluate any
/// element of a logical random sequence directly.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) noexcept {
    const std::uint64_t z = splitmix64(seed ^ splitmix64(counter));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

inline index_t product(const std::vector<index_t>& extents) noexcept {
    index_t n = 1;
    for (index_t e : extents) n *= e;
    return n;
}

}  // namespace detail
}  // namespace dnd
