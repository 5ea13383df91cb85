#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dnd/ndarray.hpp"

namespace dnd {

static_assert(std::endian::native == std::endian::little,
              "DNB containers are little-endian; big-endian hosts are unsupported");
static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);

enum class DnbDtype : std::uint8_t { f32 = 1, f64 = 2 };

/// Header of a DNB container: magic "DNB1", one dtype byte, one ndim byte,
/// then ndim little-endian 64-bit extents. The row-major payload follows
/// immediately.
struct DnbHeader {
    DnbDtype dtype = DnbDtype::f64;
    std::vector<std::uint64_t> extents;

    std::size_t header_bytes() const { return 6 + 8 * extents.size(); }
    std::size_t element_size() const { return dtype == DnbDtype::f32 ? 4 : 8; }
    std::uint64_t payload_elements() const {
        std::uint64_t n = 1;
        for (auto e : extents) n *= e;
        return n;
    }
};

namespace detail {

template <typename T>
constexpr DnbDtype dnb_dtype_of();
template <>
constexpr DnbDtype dnb_dtype_of<float>() { return DnbDtype::f32; }
template <>
constexpr DnbDtype dnb_dtype_of<double>() { return DnbDtype::f64; }

std::vector<std::uint8_t> encode_header(const DnbHeader& header);

void write_at(const std::string& path, std::uint64_t byte_offset, const char* bytes,
              std::size_t count);
void read_at(const std::string& path, std::uint64_t byte_offset, char* bytes, std::size_t count);

}  // namespace detail

/// Parses and validates the header; raises DataError naming the offending
/// field on bad magic, unknown dtype code, or a truncated header.
DnbHeader dnb_read_header(const std::string& path);

/// Collective save. Rank 0 writes the header; with split=0 every rank then
/// writes its slice at its byte offset, replicated arrays are written by
/// rank 0 alone, and any other split is redistributed to split=0 first. The
/// file is complete once the trailing barrier returns.
template <typename T>
void dnb_save(const DndArray<T>& a, const std::string& path) {
    const DndArray<T>* src = &a;
    std::optional<DndArray<T>> redistributed;
    if (a.split() && *a.split() != 0) {
        redistributed = resplit(a, 0);
        src = &*redistributed;
    }

    DnbHeader header;
    header.dtype = detail::dnb_dtype_of<T>();
    header.extents.assign(src->shape().begin(), src->shape().end());

    const Communicator& comm = src->comm();
    if (comm.rank() == 0) {
        const auto bytes = detail::encode_header(header);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("dnb_save: cannot create " + path);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!src->split() && !src->tile().data.empty())
            out.write(reinterpret_cast<const char*>(src->tile().data.data()),
                      static_cast<std::streamsize>(src->tile().data.size() * sizeof(T)));
        if (!out) throw DataError("dnb_save: write to " + path + " failed");
    }
    comm.barrier();

    if (src->split() && !src->tile().data.empty()) {
        std::uint64_t row_elems = 1;
        for (int k = 1; k < src->ndim(); ++k)
            row_elems *= static_cast<std::uint64_t>(src->shape()[static_cast<std::size_t>(k)]);
        const auto map = src->split_chunks();
        const std::uint64_t offset =
            header.header_bytes() +
            static_cast<std::uint64_t>(map.offset(comm.rank())) * row_elems * sizeof(T);
        detail::write_at(path, offset, reinterpret_cast<const char*>(src->tile().data.data()),
                         src->tile().data.size() * sizeof(T));
    }
    comm.barrier();
}

/// Collective load. With split=0 each rank reads only its chunk's byte
/// range; replicated loads read the full payload everywhere; any other
/// split loads as split=0 and redistributes.
template <typename T>
DndArray<T> dnb_load(const std::string& path, std::optional<int> split, const Communicator& comm) {
    const DnbHeader header = dnb_read_header(path);
    if (header.dtype != detail::dnb_dtype_of<T>())
        throw DataError("dnb_load: dtype_code mismatch: " + path + " holds " +
                        (header.dtype == DnbDtype::f32 ? std::string("f32") : std::string("f64")) +
                        ", caller requested " +
                        (detail::dnb_dtype_of<T>() == DnbDtype::f32 ? std::string("f32")
                                                                    : std::string("f64")));

    const std::uint64_t expected = header.header_bytes() + header.payload_elements() * sizeof(T);
    const std::uint64_t actual = std::filesystem::file_size(path);
    if (actual != expected)
        throw DataError("dnb_load: truncated payload in " + path + ": expected " +
                        std::to_string(expected) + " bytes, file has " + std::to_string(actual));

    std::vector<index_t> shape(header.extents.begin(), header.extents.end());
    detail::validate_shape_split(shape, split);

    if (split && *split != 0) {
        return resplit(dnb_load<T>(path, 0, comm), split);
    }

    Tile<T> tile = Tile<T>::filled(detail::local_extents(shape, split, comm), T{});
    if (!tile.data.empty()) {
        std::uint64_t byte_offset = header.header_bytes();
        if (split) {
            std::uint64_t row_elems = 1;
            for (std::size_t k = 1; k < shape.size(); ++k)
                row_elems *= static_cast<std::uint64_t>(shape[k]);
            const auto map = chunk_map(shape[0], comm.size());
            byte_offset += static_cast<std::uint64_t>(map.offset(comm.rank())) * row_elems * sizeof(T);
        }
        detail::read_at(path, byte_offset, reinterpret_cast<char*>(tile.data.data()),
                        tile.data.size() * sizeof(T));
    }
    return DndArray<T>(std::move(shape), split, comm, std::move(tile));
}

/// Serial conversion of a rectangular, headerless numeric CSV into a 2-D DNB
/// file; `skip_header` drops the first line. Parse failures and ragged rows
/// are reported with their line number.
void csv_to_dnb(const std::string& src_path, const std::string& dst_path,
                DnbDtype dtype = DnbDtype::f64, bool skip_header = false);

}  // namespace dnd
