#include "dnd/pairwise.hpp"

#include <cmath>
#include <utility>

namespace dnd {

namespace detail {

std::vector<double> row_norms(const Tile<double>& t) {
    const index_t rows = t.extents[0], cols = t.extents[1];
    std::vector<double> norms(static_cast<std::size_t>(rows), 0.0);
    for (index_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* row = t.data.data() + static_cast<std::size_t>(i * cols);
        for (index_t k = 0; k < cols; ++k) acc += row[static_cast<std::size_t>(k)] * row[static_cast<std::size_t>(k)];
        norms[static_cast<std::size_t>(i)] = acc;
    }
    return norms;
}

Tile<double> distance_block(const Tile<double>& a, const std::vector<double>& na,
                            const Tile<double>& b, const std::vector<double>& nb) {
    Tile<double> gram = matmul_local(a, transpose2d(b));
    const index_t rows = gram.extents[0], cols = gram.extents[1];
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j) {
            auto& g = gram.data[static_cast<std::size_t>(i * cols + j)];
            const double sq = na[static_cast<std::size_t>(i)] + nb[static_cast<std::size_t>(j)] - 2.0 * g;
            g = std::sqrt(sq > 0.0 ? sq : 0.0);
        }
    return gram;
}

}  // namespace detail

DndArray<double> cdist(const DndArray<double>& x) {
    if (x.ndim() != 2) throw ValueError("cdist: input must be 2-D");
    if (x.shape()[0] == 0) throw ValueError("cdist: input has no rows");

    const DndArray<double> rows = (x.split() && *x.split() == 0) ? x : resplit(x, 0);
    const Communicator& comm = rows.comm();
    const int p = comm.size();
    const int rank = comm.rank();
    const index_t n = rows.shape()[0];
    const index_t m = rows.shape()[1];
    const auto map = rows.split_chunks();

    const Tile<double>& local = rows.tile();
    const std::vector<double> local_norms = detail::row_norms(local);

    Tile<double> out = Tile<double>::filled({local.extents[0], n}, 0.0);

    // The traveling block starts as this rank's own tile and moves one rank
    // per round; after t shifts toward rank+1, this rank holds the block that
    // originated at rank - t.
    Tile<double> block = local;
    std::vector<double> block_norms = local_norms;
    int origin = rank;

    for (int round = 0; round < p; ++round) {
        Tile<double> distances = detail::distance_block(local, local_norms, block, block_norms);
        if (origin == rank) {
            // Self block: both axes index the same global rows, so the
            // diagonal is a distance of a row to itself.
            for (index_t i = 0; i < distances.extents[0]; ++i)
                distances.data[static_cast<std::size_t>(i * distances.extents[1] + i)] = 0.0;
        }
        place_chunk(out, 1, map.offset(origin), map.end(origin), distances.data);

        if (round + 1 < p) {
            // One buffer per exchange: block data followed by its norms.
            std::vector<double> packed = std::move(block.data);
            packed.insert(packed.end(), block_norms.begin(), block_norms.end());
            packed = comm.sendrecv((rank + 1) % p, std::move(packed), (rank + p - 1) % p);

            const index_t incoming = static_cast<index_t>(packed.size()) / (m + 1);
            block_norms.assign(packed.begin() + static_cast<std::ptrdiff_t>(incoming * m), packed.end());
            packed.resize(static_cast<std::size_t>(incoming * m));
            block = Tile<double>{{incoming, m}, std::move(packed)};
            origin = (origin + p - 1) % p;
        }
    }
    return DndArray<double>({n, n}, 0, comm, std::move(out));
}

DndArray<double> cdist_xy(const DndArray<double>& x, const DndArray<double>& y) {
    if (x.ndim() != 2 || y.ndim() != 2) throw ValueError("cdist_xy: inputs must be 2-D");
    if (x.shape()[1] != y.shape()[1])
        throw ValueError("cdist_xy: feature counts " + std::to_string(x.shape()[1]) + " and " +
                         std::to_string(y.shape()[1]) + " do not match");

    const DndArray<double> rows = (x.split() && *x.split() == 0) ? x : resplit(x, 0);
    const DndArray<double> other = y.split() ? resplit(y, std::nullopt) : y;

    Tile<double> distances = detail::distance_block(rows.tile(), detail::row_norms(rows.tile()),
                                                    other.tile(), detail::row_norms(other.tile()));
    return DndArray<double>({rows.shape()[0], other.shape()[0]}, 0, rows.comm(),
                            std::move(distances));
}

}  // namespace dnd
