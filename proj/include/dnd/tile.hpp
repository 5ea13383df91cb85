#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dnd/common.hpp"
#include "dnd/errors.hpp"

namespace dnd {

/// Rank-local dense block of a distributed array, stored row-major.
template <typename T>
struct Tile {
    std::vector<index_t> extents;
    std::vector<T> data;

    int ndim() const { return static_cast<int>(extents.size()); }
    index_t numel() const { return detail::product(extents); }

    /// Row-major element strides: strides[k] = product of extents[k+1..].
    std::vector<index_t> strides() const {
        std::vector<index_t> s(extents.size(), 1);
        for (int k = ndim() - 2; k >= 0; --k)
            s[static_cast<std::size_t>(k)] =
                s[static_cast<std::size_t>(k + 1)] * extents[static_cast<std::size_t>(k + 1)];
        return s;
    }

    static Tile filled(std::vector<index_t> extents, T value) {
        const index_t n = detail::product(extents);
        return Tile{std::move(extents), std::vector<T>(static_cast<std::size_t>(n), value)};
    }
};

namespace detail {

inline void check_axis(int ndim, int axis, const char* who) {
    if (axis < 0 || axis >= ndim)
        throw ValueError(std::string(who) + ": axis " + std::to_string(axis) +
                         " out of range for a " + std::to_string(ndim) + "-d tile");
}

inline void check_slice(index_t extent, index_t lo, index_t hi, const char* who) {
    if (lo < 0 || hi < lo || hi > extent)
        throw ValueError(std::string(who) + ": slice [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + ") out of range for extent " + std::to_string(extent));
}

/// Collapses a tile around `axis` into (outer, axis extent, inner) so slices
/// along the axis can be walked with three loops.
template <typename T>
struct AxisView {
    index_t outer = 1;
    index_t extent = 0;
    index_t inner = 1;

    AxisView(const Tile<T>& tile, int axis) {
        extent = tile.extents[static_cast<std::size_t>(axis)];
        for (int k = 0; k < axis; ++k) outer *= tile.extents[static_cast<std::size_t>(k)];
        for (int k = axis + 1; k < tile.ndim(); ++k) inner *= tile.extents[static_cast<std::size_t>(k)];
    }
};

}  // namespace detail

/// Contiguous row-major copy of the tile slice [.., lo:hi along axis, ..].
template <typename T>
std::vector<T> extract_chunk(const Tile<T>& tile, int axis, index_t lo, index_t hi) {
    detail::check_axis(tile.ndim(), axis, "extract_chunk");
    detail::check_slice(tile.extents[static_cast<std::size_t>(axis)], lo, hi, "extract_chunk");

    const detail::AxisView<T> v(tile, axis);
    std::vector<T> out(static_cast<std::size_t>(v.outer * (hi - lo) * v.inner));
    std::size_t pos = 0;
    for (index_t o = 0; o < v.outer; ++o) {
        const T* base = tile.data.data() + static_cast<std::size_t>((o * v.extent + lo) * v.inner);
        const std::size_t run = static_cast<std::size_t>((hi - lo) * v.inner);
        std::copy(base, base + run, out.data() + pos);
        pos += run;
    }
    return out;
}

/// Overwrites the tile slice [.., lo:hi along axis, ..] from a contiguous
/// buffer laid out as extract_chunk would produce it. All other elements are
/// untouched.
template <typename T>
void place_chunk(Tile<T>& tile, int axis, index_t lo, index_t hi, const std::vector<T>& buf) {
    detail::check_axis(tile.ndim(), axis, "place_chunk");
    detail::check_slice(tile.extents[static_cast<std::size_t>(axis)], lo, hi, "place_chunk");

    const detail::AxisView<T> v(tile, axis);
    if (buf.size() != static_cast<std::size_t>(v.outer * (hi - lo) * v.inner))
        throw ValueError("place_chunk: buffer holds " + std::to_string(buf.size()) +
                         " elements, slice needs " + std::to_string(v.outer * (hi - lo) * v.inner));

    std::size_t pos = 0;
    for (index_t o = 0; o < v.outer; ++o) {
        T* base = tile.data.data() + static_cast<std::size_t>((o * v.extent + lo) * v.inner);
        const std::size_t run = static_cast<std::size_t>((hi - lo) * v.inner);
        std::copy(buf.data() + pos, buf.data() + pos + run, base);
        pos += run;
    }
}

/// Physically reorders the tile so `axis` becomes the leading dimension,
/// with the remaining dimensions keeping their relative order.
template <typename T>
Tile<T> permute_leading(const Tile<T>& tile, int axis) {
    detail::check_axis(tile.ndim(), axis, "permute_leading");

    std::vector<index_t> extents;
    extents.reserve(tile.extents.size());
    extents.push_back(tile.extents[static_cast<std::size_t>(axis)]);
    for (int k = 0; k < tile.ndim(); ++k)
        if (k != axis) extents.push_back(tile.extents[static_cast<std::size_t>(k)]);

    Tile<T> out{std::move(extents), {}};
    out.data.reserve(static_cast<std::size_t>(tile.numel()));
    for (index_t k = 0; k < out.extents[0]; ++k) {
        auto block = extract_chunk(tile, axis, k, k + 1);
        out.data.insert(out.data.end(), block.begin(), block.end());
    }
    return out;
}

/// Inverse of permute_leading: moves the leading dimension back to position
/// `axis`, restoring the original layout bitwise.
template <typename T>
Tile<T> permute_from_leading(const Tile<T>& tile, int axis) {
    detail::check_axis(tile.ndim(), axis, "permute_from_leading");

    std::vector<index_t> extents(tile.extents.size());
    extents[static_cast<std::size_t>(axis)] = tile.extents[0];
    for (int k = 0, src = 1; k < tile.ndim(); ++k)
        if (k != axis) extents[static_cast<std::size_t>(k)] = tile.extents[static_cast<std::size_t>(src++)];

    Tile<T> out = Tile<T>::filled(std::move(extents), T{});
    index_t block_elems = 1;
    for (std::size_t k = 1; k < tile.extents.size(); ++k) block_elems *= tile.extents[k];

    std::vector<T> block(static_cast<std::size_t>(block_elems));
    for (index_t k = 0; k < tile.extents[0]; ++k) {
        const T* base = tile.data.data() + static_cast<std::size_t>(k * block_elems);
        block.assign(base, base + static_cast<std::size_t>(block_elems));
        place_chunk(out, axis, k, k + 1, block);
    }
    return out;
}

}  // namespace dnd
