#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dnd/chunking.hpp"
#include "dnd/common.hpp"
#include "dnd/errors.hpp"
#include "dnd/tile.hpp"
#include "dnd/transport.hpp"

namespace dnd {

namespace detail {

inline std::string shape_string(const std::vector<index_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

inline void validate_shape_split(const std::vector<index_t>& shape,
                                 const std::optional<int>& split) {
    for (index_t e : shape)
        if (e < 0) throw ValueError("negative extent in shape " + shape_string(shape));
    if (split && (*split < 0 || *split >= static_cast<int>(shape.size())))
        throw ValueError("split axis " + std::to_string(*split) + " out of range for shape " +
                         shape_string(shape));
}

inline std::vector<index_t> local_extents(const std::vector<index_t>& shape,
                                          const std::optional<int>& split,
                                          const Communicator& comm) {
    std::vector<index_t> extents = shape;
    if (split) {
        const auto map = chunk_map(shape[static_cast<std::size_t>(*split)], comm.size());
        extents[static_cast<std::size_t>(*split)] = map.extent(comm.rank());
    }
    return extents;
}

}  // namespace detail

/// Dense N-dimensional array with a global shape, decomposed along at most
/// one axis across the ranks of a communicator.
///
/// split == nullopt means every rank holds a bit-identical full copy;
/// split == s means each rank owns the chunk of axis s given by the balanced
/// chunk map, and the local tile matches the global shape on all other axes.
template <typename T>
class DndArray {
public:
    using value_type = T;

    DndArray(std::vector<index_t> shape, std::optional<int> split, Communicator comm,
             Tile<T> tile)
        : shape_(std::move(shape)), split_(split), comm_(std::move(comm)), tile_(std::move(tile)) {}

    const std::vector<index_t>& shape() const { return shape_; }
    std::optional<int> split() const { return split_; }
    const Communicator& comm() const { return comm_; }
    int ndim() const { return static_cast<int>(shape_.size()); }

    /// Shape of the rank-local tile.
    const std::vector<index_t>& lshape() const { return tile_.extents; }

    index_t numel_global() const { return detail::product(shape_); }

    const Tile<T>& tile() const { return tile_; }
    Tile<T>& tile() { return tile_; }

    /// Chunk map along the split axis; only valid when the array is split.
    ChunkMap split_chunks() const {
        if (!split_) throw ValueError("split_chunks: array is not split");
        return chunk_map(shape_[static_cast<std::size_t>(*split_)], comm_.size());
    }

private:
    std::vector<index_t> shape_;
    std::optional<int> split_;
    Communicator comm_;
    Tile<T> tile_;
};

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

template <typename T>
DndArray<T> full(std::vector<index_t> shape, T value, std::optional<int> split,
                 const Communicator& comm) {
    detail::validate_shape_split(shape, split);
    auto tile = Tile<T>::filled(detail::local_extents(shape, split, comm), value);
    return DndArray<T>(std::move(shape), split, comm, std::move(tile));
}

template <typename T>
DndArray<T> zeros(std::vector<index_t> shape, std::optional<int> split, const Communicator& comm) {
    return full<T>(std::move(shape), T(0), split, comm);
}

template <typename T>
DndArray<T> ones(std::vector<index_t> shape, std::optional<int> split, const Communicator& comm) {
    return full<T>(std::move(shape), T(1), split, comm);
}

/// Builds an array by evaluating `fn` at every global multi-index this rank
/// owns. The global content is a pure function of shape and `fn`, independent
/// of split axis and rank count.
template <typename T, typename F>
DndArray<T> generate(std::vector<index_t> shape, std::optional<int> split,
                     const Communicator& comm, F fn) {
    detail::validate_shape_split(shape, split);
    Tile<T> tile = Tile<T>::filled(detail::local_extents(shape, split, comm), T{});

    const index_t n = tile.numel();
    if (n > 0) {
        const int d = tile.ndim();
        std::vector<index_t> idx(static_cast<std::size_t>(d), 0);
        index_t split_offset = 0;
        if (split) split_offset = chunk_map(shape[static_cast<std::size_t>(*split)],
                                            comm.size()).offset(comm.rank());
        std::vector<index_t> global_idx(static_cast<std::size_t>(d), 0);
        for (index_t pos = 0; pos < n; ++pos) {
            global_idx = idx;
            if (split) global_idx[static_cast<std::size_t>(*split)] += split_offset;
            tile.data[static_cast<std::size_t>(pos)] = fn(global_idx);
            for (int k = d - 1; k >= 0; --k) {
                if (++idx[static_cast<std::size_t>(k)] < tile.extents[static_cast<std::size_t>(k)]) break;
                idx[static_cast<std::size_t>(k)] = 0;
            }
        }
    }
    return DndArray<T>(std::move(shape), split, comm, std::move(tile));
}

/// 1-D array of 0, 1, ..., n-1.
template <typename T>
DndArray<T> arange(index_t n, std::optional<int> split, const Communicator& comm) {
    return generate<T>({n}, split, comm,
                       [](const std::vector<index_t>& idx) { return static_cast<T>(idx[0]); });
}

/// Seed-deterministic uniform values in [0, 1). The global content depends
/// only on (shape, seed), never on split or rank count.
template <typename T>
DndArray<T> random_uniform(std::vector<index_t> shape, std::optional<int> split,
                           std::uint64_t seed, const Communicator& comm) {
    std::vector<index_t> global_strides(shape.size(), 1);
    for (int k = static_cast<int>(shape.size()) - 2; k >= 0; --k)
        global_strides[static_cast<std::size_t>(k)] =
            global_strides[static_cast<std::size_t>(k + 1)] * shape[static_cast<std::size_t>(k + 1)];
    return generate<T>(std::move(shape), split, comm,
                       [seed, strides = std::move(global_strides)](const std::vector<index_t>& idx) {
                           std::uint64_t flat = 0;
                           for (std::size_t k = 0; k < idx.size(); ++k)
                               flat += static_cast<std::uint64_t>(idx[k]) *
                                       static_cast<std::uint64_t>(strides[k]);
                           return static_cast<T>(detail::uniform01(seed, flat));
                       });
}

/// Distributes replicated global content: every rank passes the same
/// row-major `data` and keeps its slice along the split axis.
template <typename T>
DndArray<T> from_global(const std::vector<T>& data, std::vector<index_t> shape,
                        std::optional<int> split, const Communicator& comm) {
    detail::validate_shape_split(shape, split);
    if (static_cast<index_t>(data.size()) != detail::product(shape))
        throw ValueError("from_global: data holds " + std::to_string(data.size()) +
                         " elements, shape " + detail::shape_string(shape) + " needs " +
                         std::to_string(detail::product(shape)));
    Tile<T> global{shape, data};
    if (!split) return DndArray<T>(std::move(shape), split, comm, std::move(global));

    const auto map = chunk_map(shape[static_cast<std::size_t>(*split)], comm.size());
    auto buf = extract_chunk(global, *split, map.offset(comm.rank()), map.end(comm.rank()));
    Tile<T> tile{detail::local_extents(shape, split, comm), std::move(buf)};
    return DndArray<T>(std::move(shape), split, comm, std::move(tile));
}

/// Expands an m-vector into a (rows, m) array whose every row equals `row`.
template <typename T>
DndArray<T> broadcast_row(const std::vector<T>& row, index_t rows, std::optional<int> split,
                          const Communicator& comm) {
    return generate<T>({rows, static_cast<index_t>(row.size())}, split, comm,
                       [&row](const std::vector<index_t>& idx) {
                           return row[static_cast<std::size_t>(idx[1])];
                       });
}

// ---------------------------------------------------------------------------
// Elementwise operations
// ---------------------------------------------------------------------------

template <typename T, typename F>
DndArray<T> map_elementwise(const DndArray<T>& a, F fn) {
    Tile<T> tile = a.tile();
    for (auto& v : tile.data) v = fn(v);
    return DndArray<T>(a.shape(), a.split(), a.comm(), std::move(tile));
}

template <typename T, typename F>
DndArray<T> zip_elementwise(const DndArray<T>& a, const DndArray<T>& b, F fn) {
    if (a.shape() != b.shape())
        throw ValueError("zip_elementwise: shape mismatch " + detail::shape_string(a.shape()) +
                         " vs " + detail::shape_string(b.shape()));
    if (a.split() != b.split())
        throw ValueError("zip_elementwise: split mismatch");
    if (!a.comm().congruent(b.comm()))
        throw ValueError("zip_elementwise: operands live on different communicators");

    Tile<T> tile = a.tile();
    const auto& other = b.tile().data;
    for (std::size_t i = 0; i < tile.data.size(); ++i) tile.data[i] = fn(tile.data[i], other[i]);
    return DndArray<T>(a.shape(), a.split(), a.comm(), std::move(tile));
}

template <typename To, typename From>
DndArray<To> astype(const DndArray<From>& a) {
    Tile<To> tile;
    tile.extents = a.tile().extents;
    tile.data.reserve(a.tile().data.size());
    for (const From& v : a.tile().data) tile.data.push_back(static_cast<To>(v));
    return DndArray<To>(a.shape(), a.split(), a.comm(), std::move(tile));
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

enum class Reduce { sum, min, max };

namespace detail {

template <typename T>
T reduce_identity(Reduce op) {
    switch (op) {
        case Reduce::sum: return T(0);
        case Reduce::min:
            return std::numeric_limits<T>::has_infinity ? std::numeric_limits<T>::infinity()
                                                        : std::numeric_limits<T>::max();
        case Reduce::max:
            return std::numeric_limits<T>::has_infinity ? -std::numeric_limits<T>::infinity()
                                                        : std::numeric_limits<T>::lowest();
    }
    return T(0);
}

template <typename T>
T reduce_apply(Reduce op, T a, T b) {
    switch (op) {
        case Reduce::sum: return a + b;
        case Reduce::min: return b < a ? b : a;
        case Reduce::max: return b > a ? b : a;
    }
    return a;
}

}  // namespace detail

/// Reduces every element to one scalar, replicated on all ranks.
template <typename T>
T reduce_all(const DndArray<T>& a, Reduce op) {
    if (op != Reduce::sum && a.numel_global() == 0)
        throw ValueError("reduce_all: min/max of an empty array is undefined");
    T local = detail::reduce_identity<T>(op);
    for (const T& v : a.tile().data) local = detail::reduce_apply(op, local, v);
    // Replicated arrays already hold the full data; only split ones combine.
    if (!a.split()) return local;
    return a.comm().allreduce(
        local, [op](T acc, const T& v) { return detail::reduce_apply(op, acc, v); },
        detail::reduce_identity<T>(op));
}

/// Reduces along one axis. Reducing along the split axis combines partial
/// results across ranks and yields a replicated (split = none) array; any
/// other axis reduces locally and preserves the split (index adjusted for
/// the removed dimension).
template <typename T>
DndArray<T> reduce_axis(const DndArray<T>& a, Reduce op, int axis) {
    detail::check_axis(a.ndim(), axis, "reduce_axis");
    if (op != Reduce::sum && a.shape()[static_cast<std::size_t>(axis)] == 0)
        throw ValueError("reduce_axis: min/max along an empty axis is undefined");

    std::vector<index_t> out_shape;
    for (int k = 0; k < a.ndim(); ++k)
        if (k != axis) out_shape.push_back(a.shape()[static_cast<std::size_t>(k)]);

    const detail::AxisView<T> view(a.tile(), axis);
    std::vector<T> partial(static_cast<std::size_t>(view.outer * view.inner),
                           detail::reduce_identity<T>(op));
    const T* src = a.tile().data.data();
    for (index_t o = 0; o < view.outer; ++o)
        for (index_t k = 0; k < view.extent; ++k)
            for (index_t i = 0; i < view.inner; ++i) {
                auto& acc = partial[static_cast<std::size_t>(o * view.inner + i)];
                acc = detail::reduce_apply(op, acc,
                                           src[static_cast<std::size_t>((o * view.extent + k) * view.inner + i)]);
            }

    if (a.split() && *a.split() == axis) {
        // Partial results cover the same global slots on every rank.
        auto combined = a.comm().allreduce(
            partial,
            [op](std::vector<T> acc, const std::vector<T>& v) {
                for (std::size_t i = 0; i < acc.size(); ++i)
                    acc[i] = detail::reduce_apply(op, acc[i], v[i]);
                return acc;
            },
            std::vector<T>(partial.size(), detail::reduce_identity<T>(op)));
        Tile<T> tile{out_shape, std::move(combined)};
        return DndArray<T>(std::move(out_shape), std::nullopt, a.comm(), std::move(tile));
    }

    std::optional<int> out_split = a.split();
    if (out_split && axis < *out_split) out_split = *out_split - 1;
    std::vector<index_t> out_extents;
    for (int k = 0; k < a.ndim(); ++k)
        if (k != axis) out_extents.push_back(a.tile().extents[static_cast<std::size_t>(k)]);
    Tile<T> tile{std::move(out_extents), std::move(partial)};
    return DndArray<T>(std::move(out_shape), out_split, a.comm(), std::move(tile));
}

// ---------------------------------------------------------------------------
// Redistribution
// ---------------------------------------------------------------------------

/// Moves the array to a different split axis (or to full replication)
/// without changing its global content. The result is balanced per the
/// chunk map of the new axis.
template <typename T>
DndArray<T> resplit(const DndArray<T>& a, std::optional<int> new_split) {
    detail::validate_shape_split(a.shape(), new_split);
    if (a.split() == new_split) return a;
    const Communicator& comm = a.comm();

    if (!a.split()) {  // replicated -> split: slice locally
        const int s = *new_split;
        const auto map = chunk_map(a.shape()[static_cast<std::size_t>(s)], comm.size());
        auto buf = extract_chunk(a.tile(), s, map.offset(comm.rank()), map.end(comm.rank()));
        Tile<T> tile{detail::local_extents(a.shape(), new_split, comm), std::move(buf)};
        return DndArray<T>(a.shape(), new_split, comm, std::move(tile));
    }

    if (!new_split) {  // split -> replicated: gather chunks from all ranks
        const int s = *a.split();
        Tile<T> leading = permute_leading(a.tile(), s);
        auto parts = comm.allgather_varying(std::move(leading.data));

        std::vector<index_t> extents = leading.extents;
        extents[0] = a.shape()[static_cast<std::size_t>(s)];
        Tile<T> assembled{std::move(extents), {}};
        assembled.data.reserve(static_cast<std::size_t>(assembled.numel()));
        for (auto& part : parts)
            assembled.data.insert(assembled.data.end(), part.begin(), part.end());

        Tile<T> tile = permute_from_leading(assembled, s);
        return DndArray<T>(a.shape(), std::nullopt, comm, std::move(tile));
    }

    // split s -> split s': exchange the intersection blocks
    const int s = *a.split();
    const int s2 = *new_split;
    const auto target = chunk_map(a.shape()[static_cast<std::size_t>(s2)], comm.size());
    std::vector<std::vector<T>> parts(static_cast<std::size_t>(comm.size()));
    for (int d = 0; d < comm.size(); ++d)
        parts[static_cast<std::size_t>(d)] =
            extract_chunk(a.tile(), s2, target.offset(d), target.end(d));
    auto received = comm.alltoall_varying(std::move(parts));

    const auto source = chunk_map(a.shape()[static_cast<std::size_t>(s)], comm.size());
    Tile<T> tile = Tile<T>::filled(detail::local_extents(a.shape(), new_split, comm), T{});
    for (int src = 0; src < comm.size(); ++src)
        place_chunk(tile, s, source.offset(src), source.end(src),
                    received[static_cast<std::size_t>(src)]);
    return DndArray<T>(a.shape(), new_split, comm, std::move(tile));
}

/// Full global content, identical on every rank.
template <typename T>
std::vector<T> gather(const DndArray<T>& a) {
    if (!a.split()) return a.tile().data;
    return resplit(a, std::nullopt).tile().data;
}

// ---------------------------------------------------------------------------
// Local dense kernels
// ---------------------------------------------------------------------------

/// Standard dense product of two 2-D row-major tiles.
template <typename T>
Tile<T> matmul_local(const Tile<T>& a, const Tile<T>& b) {
    if (a.ndim() != 2 || b.ndim() != 2)
        throw ValueError("matmul_local: operands must be 2-D");
    if (a.extents[1] != b.extents[0])
        throw ValueError("matmul_local: inner dimensions " + std::to_string(a.extents[1]) +
                         " and " + std::to_string(b.extents[0]) + " do not match");

    const index_t rows = a.extents[0], inner = a.extents[1], cols = b.extents[1];
    Tile<T> out = Tile<T>::filled({rows, cols}, T(0));
    for (index_t i = 0; i < rows; ++i)
        for (index_t k = 0; k < inner; ++k) {
            const T aik = a.data[static_cast<std::size_t>(i * inner + k)];
            const T* brow = b.data.data() + static_cast<std::size_t>(k * cols);
            T* orow = out.data.data() + static_cast<std::size_t>(i * cols);
            for (index_t j = 0; j < cols; ++j) orow[static_cast<std::size_t>(j)] += aik * brow[static_cast<std::size_t>(j)];
        }
    return out;
}

template <typename T>
Tile<T> transpose2d(const Tile<T>& t) {
    if (t.ndim() != 2) throw ValueError("transpose2d: tile must be 2-D");
    return permute_leading(t, 1);
}

}  // namespace dnd
