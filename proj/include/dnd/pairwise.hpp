#pragma once

#include "dnd/ndarray.hpp"

namespace dnd {

/// Pairwise Euclidean distance matrix of the rows of a 2-D array.
///
/// Row blocks travel around the ranks in a ring (send to rank+1, receive from
/// rank-1); each of the p rounds fills the column window of the block's
/// origin via the quadratic expansion |x|^2 + |y|^2 - 2 x.y. Exactly p-1
/// ring exchanges are performed per rank. The result is n x n with split=0,
/// its row blocks matching the input's chunk map. Inputs with a different
/// split are redistributed to split=0 first.
DndArray<double> cdist(const DndArray<double>& x);

/// Distances between the rows of a distributed x (split=0) and a replicated
/// y; communication-free. Inputs are redistributed if needed.
DndArray<double> cdist_xy(const DndArray<double>& x, const DndArray<double>& y);

namespace detail {

/// Squared row norms of a 2-D tile.
std::vector<double> row_norms(const Tile<double>& t);

/// block[i][j] = sqrt(max(na[i] + nb[j] - 2 (a.b^T)[i][j], 0)); negative
/// values from cancellation are clamped before the square root.
Tile<double> distance_block(const Tile<double>& a, const std::vector<double>& na,
                            const Tile<double>& b, const std::vector<double>& nb);

}  // namespace detail
}  // namespace dnd
