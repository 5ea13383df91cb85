#include "dnd/chunking.hpp"

#include <string>

#include "dnd/errors.hpp"

namespace dnd {

ChunkMap chunk_map(index_t global_extent, int size) {
    if (global_extent < 0)
        throw ValueError("chunk_map: negative extent " + std::to_string(global_extent));
    if (size < 1) throw ValueError("chunk_map: rank count must be positive, got " + std::to_string(size));

    ChunkMap map;
    map.global_extent = global_extent;
    map.size = size;
    map.offsets.resize(static_cast<std::size_t>(size));
    map.extents.resize(static_cast<std::size_t>(size));

    const index_t base = global_extent / size;
    const index_t remainder = global_extent % size;
    index_t offset = 0;
    for (int r = 0; r < size; ++r) {
        const index_t extent = base + (r < remainder ? 1 : 0);
        map.offsets[static_cast<std::size_t>(r)] = offset;
        map.extents[static_cast<std::size_t>(r)] = extent;
        offset += extent;
    }
    return map;
}

}  // namespace dnd
