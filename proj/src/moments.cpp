#include "dnd/moments.hpp"

#include <cmath>
#include <string>

namespace dnd {

namespace {

void welford_update(double x, double& mean, double& m2, std::int64_t n_after) {
    const double delta = x - mean;
    mean += delta / static_cast<double>(n_after);
    m2 += delta * (x - mean);
}

MomentState global_state(const DndArray<double>& a) {
    MomentState local = local_moments(a.tile());
    if (!a.split()) return local;
    return a.comm().allreduce(
        local, [](MomentState acc, const MomentState& s) { return combine(acc, s); },
        MomentState::identity(1));
}

double variance_from(const MomentState& s, std::size_t slot, std::int64_t ddof,
                     const char* who) {
    if (s.count - ddof <= 0)
        throw ValueError(std::string(who) + ": need more than ddof=" + std::to_string(ddof) +
                         " samples, got " + std::to_string(s.count));
    return s.m2[slot] / static_cast<double>(s.count - ddof);
}

/// Shared axis-wise driver; `finish` maps (state, slot) to the output value.
template <typename F>
DndArray<double> axis_statistic(const DndArray<double>& a, int axis, F finish) {
    detail::check_axis(a.ndim(), axis, "moments");

    std::vector<index_t> out_shape;
    for (int k = 0; k < a.ndim(); ++k)
        if (k != axis) out_shape.push_back(a.shape()[static_cast<std::size_t>(k)]);

    if (a.split() && *a.split() == axis) {
        const std::size_t arity = static_cast<std::size_t>(detail::product(out_shape));
        MomentState local = a.tile().numel() > 0 ? local_moments_axis(a.tile(), axis)
                                                 : MomentState::identity(arity);
        MomentState global = a.comm().allreduce(
            local, [](MomentState acc, const MomentState& s) { return combine(acc, s); },
            MomentState::identity(arity));
        std::vector<double> values(arity);
        for (std::size_t i = 0; i < arity; ++i) values[i] = finish(global, i);
        Tile<double> tile{out_shape, std::move(values)};
        return DndArray<double>(std::move(out_shape), std::nullopt, a.comm(), std::move(tile));
    }

    MomentState local = local_moments_axis(a.tile(), axis);
    std::vector<double> values(local.arity());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = finish(local, i);

    std::optional<int> out_split = a.split();
    if (out_split && axis < *out_split) out_split = *out_split - 1;
    std::vector<index_t> out_extents;
    for (int k = 0; k < a.ndim(); ++k)
        if (k != axis) out_extents.push_back(a.tile().extents[static_cast<std::size_t>(k)]);
    Tile<double> tile{std::move(out_extents), std::move(values)};
    return DndArray<double>(std::move(out_shape), out_split, a.comm(), std::move(tile));
}

}  // namespace

MomentState combine(const MomentState& a, const MomentState& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    if (a.arity() != b.arity())
        throw ValueError("combine: arity mismatch, " + std::to_string(a.arity()) + " vs " +
                         std::to_string(b.arity()));

    MomentState out;
    out.count = a.count + b.count;
    out.mean.resize(a.arity());
    out.m2.resize(a.arity());
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = static_cast<double>(out.count);
    for (std::size_t i = 0; i < a.arity(); ++i) {
        const double delta = b.mean[i] - a.mean[i];
        out.mean[i] = a.mean[i] + delta * nb / n;
        out.m2[i] = a.m2[i] + b.m2[i] + delta * delta * na * nb / n;
    }
    return out;
}

MomentState local_moments(const Tile<double>& tile) {
    MomentState s = MomentState::identity(1);
    for (double x : tile.data) {
        ++s.count;
        welford_update(x, s.mean[0], s.m2[0], s.count);
    }
    return s;
}

MomentState local_moments_axis(const Tile<double>& tile, int axis) {
    detail::check_axis(tile.ndim(), axis, "local_moments_axis");
    const detail::AxisView<double> view(tile, axis);
    MomentState s = MomentState::identity(static_cast<std::size_t>(view.outer * view.inner));
    s.count = view.extent;
    const double* src = tile.data.data();
    for (index_t o = 0; o < view.outer; ++o)
        for (index_t k = 0; k < view.extent; ++k)
            for (index_t i = 0; i < view.inner; ++i) {
                const std::size_t slot = static_cast<std::size_t>(o * view.inner + i);
                welford_update(src[static_cast<std::size_t>((o * view.extent + k) * view.inner + i)],
                               s.mean[slot], s.m2[slot], k + 1);
            }
    return s;
}

double mean(const DndArray<double>& a) { return global_state(a).mean[0]; }

double var(const DndArray<double>& a, std::int64_t ddof) {
    return variance_from(global_state(a), 0, ddof, "var");
}

double stddev(const DndArray<double>& a, std::int64_t ddof) {
    return std::sqrt(var(a, ddof));
}

DndArray<double> mean_axis(const DndArray<double>& a, int axis) {
    return axis_statistic(a, axis, [](const MomentState& s, std::size_t i) { return s.mean[i]; });
}

DndArray<double> var_axis(const DndArray<double>& a, int axis, std::int64_t ddof) {
    return axis_statistic(a, axis, [ddof](const MomentState& s, std::size_t i) {
        return variance_from(s, i, ddof, "var_axis");
    });
}

DndArray<double> stddev_axis(const DndArray<double>& a, int axis, std::int64_t ddof) {
    return axis_statistic(a, axis, [ddof](const MomentState& s, std::size_t i) {
        return std::sqrt(variance_from(s, i, ddof, "stddev_axis"));
    });
}

}  // namespace dnd
