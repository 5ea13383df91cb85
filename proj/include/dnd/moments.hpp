#pragma once

#include <cstdint>
#include <vector>

#include "dnd/ndarray.hpp"

namespace dnd {

/// Partial statistics of a sample: count, running mean and sum of squared
/// deviations (M2). Scalar statistics have arity 1; per-slot statistics
/// along an axis use one entry per slot. The empty state (count = 0,
/// mean = m2 = 0) is the identity element of combine().
struct MomentState {
    std::int64_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    std::size_t arity() const { return mean.size(); }

    static MomentState identity(std::size_t arity) {
        return MomentState{0, std::vector<double>(arity, 0.0), std::vector<double>(arity, 0.0)};
    }
};

/// Merges two partial states as if their samples had been processed in one
/// pass. Combining with the identity state returns the other operand exactly.
MomentState combine(const MomentState& a, const MomentState& b);

/// Single-pass (Welford) statistics of the flattened tile.
MomentState local_moments(const Tile<double>& tile);

/// Single-pass statistics per slot of the remaining dimensions, reducing
/// along `axis`; every slot shares the count tile.extents[axis].
MomentState local_moments_axis(const Tile<double>& tile, int axis);

double mean(const DndArray<double>& a);
double var(const DndArray<double>& a, std::int64_t ddof = 0);
double stddev(const DndArray<double>& a, std::int64_t ddof = 0);

/// Axis-wise moments follow the reduce placement rules: reducing along the
/// split axis combines states across ranks (result replicated), any other
/// axis is communication-free (split preserved, adjusted for the removed
/// dimension).
DndArray<double> mean_axis(const DndArray<double>& a, int axis);
DndArray<double> var_axis(const DndArray<double>& a, int axis, std::int64_t ddof = 0);
DndArray<double> stddev_axis(const DndArray<double>& a, int axis, std::int64_t ddof = 0);

}  // namespace dnd
