#include "dnd/cluster.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dnd/pairwise.hpp"

namespace dnd {

namespace {

void validate_points(const DndArray<double>& x, int k, const char* who) {
    if (x.ndim() != 2) throw ValueError(std::string(who) + ": input must be 2-D");
    if (k < 1) throw ValueError(std::string(who) + ": k must be positive, got " + std::to_string(k));
    if (static_cast<index_t>(k) > x.shape()[0])
        throw ValueError(std::string(who) + ": k=" + std::to_string(k) + " exceeds the " +
                         std::to_string(x.shape()[0]) + " available samples");
}

std::vector<double> plus_vec(std::vector<double> acc, const std::vector<double>& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    return acc;
}

/// Replicates the selected rows of a split=0 array via a zero-filled sum.
std::vector<double> gather_rows(const DndArray<double>& rows, const std::vector<index_t>& indices) {
    const index_t m = rows.shape()[1];
    const auto map = rows.split_chunks();
    const index_t lo = map.offset(rows.comm().rank());
    const index_t hi = map.end(rows.comm().rank());

    std::vector<double> local(indices.size() * static_cast<std::size_t>(m), 0.0);
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const index_t g = indices[j];
        if (g >= lo && g < hi) {
            const double* src = rows.tile().data.data() + static_cast<std::size_t>((g - lo) * m);
            std::copy(src, src + m, local.data() + j * static_cast<std::size_t>(m));
        }
    }
    return rows.comm().allreduce(local, plus_vec, std::vector<double>(local.size(), 0.0));
}

std::vector<std::int32_t> assign_local(const Tile<double>& distances) {
    const index_t rows = distances.extents[0], k = distances.extents[1];
    std::vector<std::int32_t> labels(static_cast<std::size_t>(rows), 0);
    for (index_t i = 0; i < rows; ++i) {
        const double* row = distances.data.data() + static_cast<std::size_t>(i * k);
        std::int32_t best = 0;
        for (index_t j = 1; j < k; ++j)
            if (row[static_cast<std::size_t>(j)] < row[static_cast<std::size_t>(best)])
                best = static_cast<std::int32_t>(j);
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

}  // namespace

std::vector<index_t> kmeans_init_indices(index_t n, int k, std::uint64_t seed) {
    if (k < 1 || static_cast<index_t>(k) > n)
        throw ValueError("kmeans_init_indices: k=" + std::to_string(k) +
                         " out of range for n=" + std::to_string(n));
    // Partial Fisher-Yates driven by a counter-based stream.
    std::vector<index_t> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), index_t{0});
    for (int j = 0; j < k; ++j) {
        const std::uint64_t draw =
            detail::splitmix64(seed ^ detail::splitmix64(0x6b8b4567u + static_cast<std::uint64_t>(j)));
        const index_t pick = j + static_cast<index_t>(draw % static_cast<std::uint64_t>(n - j));
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

std::vector<double> kmeans_init_centroids(const DndArray<double>& x, int k, std::uint64_t seed) {
    validate_points(x, k, "kmeans_init_centroids");
    const DndArray<double> rows = (x.split() && *x.split() == 0) ? x : resplit(x, 0);
    return gather_rows(rows, kmeans_init_indices(rows.shape()[0], k, seed));
}

KMeansModel kmeans_fit(const DndArray<double>& x, int k, int max_iter, double tol,
                       std::uint64_t seed) {
    validate_points(x, k, "kmeans_fit");
    if (max_iter < 1)
        throw ValueError("kmeans_fit: max_iter must be positive, got " + std::to_string(max_iter));
    for (double v : x.tile().data)
        if (!std::isfinite(v)) throw ValueError("kmeans_fit: input contains non-finite values");

    const DndArray<double> rows = (x.split() && *x.split() == 0) ? x : resplit(x, 0);
    const Communicator& comm = rows.comm();
    const index_t m = rows.shape()[1];
    const std::size_t km = static_cast<std::size_t>(k) * static_cast<std::size_t>(m);

    KMeansModel model;
    model.k = k;
    model.n_features = m;
    model.seed = seed;
    model.centroids = gather_rows(rows, kmeans_init_indices(rows.shape()[0], k, seed));

    const Tile<double>& local = rows.tile();
    const index_t local_rows = local.extents[0];

    for (int iter = 0; iter < max_iter; ++iter) {
        const auto centroid_array =
            from_global(model.centroids, {static_cast<index_t>(k), m}, std::nullopt, comm);
        const auto distances = cdist_xy(rows, centroid_array);
        const auto labels = assign_local(distances.tile());

        // Cluster sums and counts share one reduction.
        std::vector<double> stats(km + static_cast<std::size_t>(k), 0.0);
        double local_inertia = 0.0;
        for (index_t i = 0; i < local_rows; ++i) {
            const auto j = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
            const double* src = local.data.data() + static_cast<std::size_t>(i * m);
            double* dst = stats.data() + j * static_cast<std::size_t>(m);
            for (index_t f = 0; f < m; ++f) dst[static_cast<std::size_t>(f)] += src[static_cast<std::size_t>(f)];
            stats[km + j] += 1.0;
            const double d = distances.tile().data[static_cast<std::size_t>(i * k) + j];
            local_inertia += d * d;
        }
        stats = comm.allreduce(stats, plus_vec, std::vector<double>(stats.size(), 0.0));

        std::vector<double> next = model.centroids;
        for (int j = 0; j < k; ++j) {
            const double count = stats[km + static_cast<std::size_t>(j)];
            if (count > 0.0)
                for (index_t f = 0; f < m; ++f)
                    next[static_cast<std::size_t>(j * m + f)] =
                        stats[static_cast<std::size_t>(j) * static_cast<std::size_t>(m) +
                              static_cast<std::size_t>(f)] / count;
        }

        model.inertia_trace.push_back(comm.allreduce(
            local_inertia, [](double a, double b) { return a + b; }, 0.0));
        model.iterations_run = iter + 1;

        double displacement = 0.0;
        for (int j = 0; j < k; ++j) {
            double sq = 0.0;
            for (index_t f = 0; f < m; ++f) {
                const double d = next[static_cast<std::size_t>(j * m + f)] -
                                 model.centroids[static_cast<std::size_t>(j * m + f)];
                sq += d * d;
            }
            displacement = std::max(displacement, std::sqrt(sq));
        }
        model.centroids = std::move(next);
        if (displacement < tol) break;
    }
    return model;
}

DndArray<std::int32_t> kmeans_predict(const KMeansModel& model, const DndArray<double>& x) {
    if (x.ndim() != 2) throw ValueError("kmeans_predict: input must be 2-D");
    if (x.shape()[1] != model.n_features)
        throw ValueError("kmeans_predict: input has " + std::to_string(x.shape()[1]) +
                         " features, model expects " + std::to_string(model.n_features));
    if (x.split() && *x.split() != 0)
        throw ValueError("kmeans_predict: input must be split=0 or replicated");

    const auto centroid_array = from_global(
        model.centroids, {static_cast<index_t>(model.k), model.n_features}, std::nullopt, x.comm());

    Tile<double> distances =
        detail::distance_block(x.tile(), detail::row_norms(x.tile()), centroid_array.tile(),
                               detail::row_norms(centroid_array.tile()));
    Tile<std::int32_t> labels{{x.tile().extents[0]}, assign_local(distances)};
    return DndArray<std::int32_t>({x.shape()[0]}, x.split() ? std::optional<int>(0) : std::nullopt,
                                  x.comm(), std::move(labels));
}

}  // namespace dnd
