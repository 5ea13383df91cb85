#pragma once

#include <cstdint>
#include <vector>

#include "dnd/ndarray.hpp"

namespace dnd {

/// Fitted k-means model. Centroids are replicated on every rank; the inertia
/// trace records the clustering objective (sum of squared distances of the
/// points to their assigned centroids) once per iteration and is
/// nonincreasing.
struct KMeansModel {
    int k = 0;
    index_t n_features = 0;
    std::vector<double> centroids;  // k x n_features, row-major
    std::vector<double> inertia_trace;
    int iterations_run = 0;
    std::uint64_t seed = 0;
};

/// k distinct global row indices, a pure function of (n, k, seed) so every
/// rank count and split draws the same panel.
std::vector<index_t> kmeans_init_indices(index_t n, int k, std::uint64_t seed);

/// Rows of x at the sampled indices, replicated to all ranks (k x m).
std::vector<double> kmeans_init_centroids(const DndArray<double>& x, int k, std::uint64_t seed);

/// Lloyd's algorithm over row-distributed data. Per iteration: local
/// point-to-centroid distances, argmin assignment (ties to the lowest
/// index), summed cluster statistics via allreduce, centroid update (empty
/// clusters keep their previous centroid), and the inertia of the current
/// assignment. Stops after max_iter iterations or when the largest centroid
/// displacement (per-centroid Euclidean norm) drops below tol; tol = 0 never
/// stops early.
KMeansModel kmeans_fit(const DndArray<double>& x, int k, int max_iter, double tol,
                       std::uint64_t seed);

/// Nearest-centroid label per row; ties go to the lowest centroid index.
/// Accepts split=0 (labels split=0) or replicated input (labels replicated).
DndArray<std::int32_t> kmeans_predict(const KMeansModel& model, const DndArray<double>& x);

}  // namespace dnd
