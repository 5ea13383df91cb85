#pragma once

#include <optional>
#include <string>

#include "dnd/dataio.hpp"
#include "dnd/ndarray.hpp"

namespace dndcli {

/// Where benchmark/verification data comes from: a DNB file, or a seeded
/// synthetic matrix whose global content is independent of split and ranks.
struct DataSpec {
    std::string path;  // empty means synthetic
    dnd::index_t rows = 0;
    dnd::index_t cols = 0;
    std::uint64_t seed = 42;
    std::optional<int> split = 0;
};

struct Dataset {
    dnd::DndArray<double> x;
    std::optional<dnd::DndArray<double>> y;  // lasso targets
};

/// Loads a DNB file as f64 regardless of the stored dtype.
inline dnd::DndArray<double> load_as_f64(const std::string& path, std::optional<int> split,
                                         const dnd::Communicator& comm) {
    const auto header = dnd::dnb_read_header(path);
    if (header.dtype == dnd::DnbDtype::f32)
        return dnd::astype<double>(dnd::dnb_load<float>(path, split, comm));
    return dnd::dnb_load<double>(path, split, comm);
}

/// Sparse coefficients planted in synthetic regression targets.
inline double planted_weight(dnd::index_t j) {
    switch (j) {
        case 1: return 2.0;
        case 2: return -1.0;
        case 5: return 0.5;
        default: return 0.0;
    }
}

inline Dataset make_dataset(const std::string& algo, const DataSpec& spec,
                            const dnd::Communicator& comm) {
    using dnd::index_t;

    if (algo != "lasso") {
        if (!spec.path.empty()) return {load_as_f64(spec.path, spec.split, comm), std::nullopt};
        return {dnd::random_uniform<double>({spec.rows, spec.cols}, spec.split, spec.seed, comm),
                std::nullopt};
    }

    if (!spec.path.empty()) {
        // Supervised layout: the last column is the target, the rest are
        // features; a bias column of ones is prepended.
        auto raw = load_as_f64(spec.path, 0, comm);
        if (raw.ndim() != 2 || raw.shape()[1] < 2)
            throw dnd::ValueError("lasso data must be 2-D with at least two columns");
        const index_t n = raw.shape()[0];
        const index_t c = raw.shape()[1];
        const index_t local = raw.tile().extents[0];

        dnd::Tile<double> xt = dnd::Tile<double>::filled({local, c}, 1.0);
        dnd::Tile<double> yt = dnd::Tile<double>::filled({local}, 0.0);
        for (index_t i = 0; i < local; ++i) {
            const double* src = raw.tile().data.data() + static_cast<std::size_t>(i * c);
            double* dst = xt.data.data() + static_cast<std::size_t>(i * c);
            for (index_t j = 0; j + 1 < c; ++j) dst[static_cast<std::size_t>(j + 1)] = src[static_cast<std::size_t>(j)];
            yt.data[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(c - 1)];
        }
        dnd::DndArray<double> x({n, c}, 0, comm, std::move(xt));
        dnd::DndArray<double> y({n}, 0, comm, std::move(yt));
        return {std::move(x), std::move(y)};
    }

    if (spec.cols < 2) throw dnd::ValueError("synthetic lasso data needs at least two columns");
    const index_t m = spec.cols;
    const std::uint64_t seed = spec.seed;
    auto x = dnd::generate<double>(
        {spec.rows, m}, spec.split, comm, [seed, m](const std::vector<index_t>& idx) {
            if (idx[1] == 0) return 1.0;
            return dnd::detail::uniform01(
                seed, static_cast<std::uint64_t>(idx[0] * m + idx[1]));
        });
    auto y = dnd::generate<double>(
        {spec.rows}, spec.split ? std::optional<int>(0) : std::nullopt, comm,
        [seed, m](const std::vector<index_t>& idx) {
            const index_t i = idx[0];
            double acc = planted_weight(0);
            for (index_t j = 1; j < m; ++j)
                acc += planted_weight(j) *
                       dnd::detail::uniform01(seed, static_cast<std::uint64_t>(i * m + j));
            const std::uint64_t noise_seed = seed ^ 0x5bd1e995u;
            return acc + 0.05 * (dnd::detail::uniform01(noise_seed, static_cast<std::uint64_t>(i)) - 0.5);
        });
    return {std::move(x), std::move(y)};
}

}  // namespace dndcli
