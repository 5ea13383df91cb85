#pragma once

#include <vector>

#include "dnd/common.hpp"

namespace dnd {

/// Per-rank decomposition of one axis: offsets and extents of every chunk.
///
/// Extents sum to the global extent and differ by at most one element; the
/// larger chunks sit on the lower ranks. A rank count exceeding the extent is
/// legal and yields zero-extent chunks on the highest ranks.
struct ChunkMap {
    index_t global_extent = 0;
    int size = 1;
    std::vector<index_t> offsets;
    std::vector<index_t> extents;

    index_t offset(int rank) const { return offsets[static_cast<std::size_t>(rank)]; }
    index_t extent(int rank) const { return extents[static_cast<std::size_t>(rank)]; }
    /// One past the last index owned by `rank`.
    index_t end(int rank) const { return offset(rank) + extent(rank); }
};

/// Balanced chunk map of `global_extent` elements over `size` ranks.
ChunkMap chunk_map(index_t global_extent, int size);

}  // namespace dnd
