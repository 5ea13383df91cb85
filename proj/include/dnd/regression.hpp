#pragma once

#include <vector>

#include "dnd/ndarray.hpp"

namespace dnd {

/// Fitted LASSO model. weights[0] is the unpenalized bias coefficient
/// matching the all-ones first column of the design matrix; the remaining
/// entries are the feature coefficients the L1 penalty acts on. The
/// objective trace records |y - Xw|^2 + lambda * |w_1..| once per sweep and
/// is nonincreasing.
struct LassoModel {
    std::vector<double> weights;
    double lambda = 0.0;
    std::vector<double> objective_trace;
    int sweeps_run = 0;
};

/// Proximal operator of the L1 norm: sign(rho) * max(|rho| - threshold, 0).
double soft_threshold(double rho, double threshold);

/// Cyclic coordinate descent on the L1-penalized least squares objective.
///
/// x is n x m with an all-ones first column, split by rows; y holds the n
/// targets. Coefficients are replicated on every rank; each coordinate step
/// reduces one scalar correlation across ranks, updates the rank-local
/// residual, and minimizes the objective exactly in that coordinate
/// (threshold lambda/2, bias unpenalized). Columns with zero squared norm
/// are skipped and keep a zero coefficient. Stops after `sweeps` sweeps or
/// when the largest coordinate change drops below tol; tol = 0 never stops
/// early. Features are used as given; callers standardize beforehand if
/// their scales differ.
LassoModel lasso_fit(const DndArray<double>& x, const DndArray<double>& y, double lambda,
                     int sweeps, double tol = 0.0);

/// Local matrix-vector product Xw; accepts split=0 (result split=0) or
/// replicated input (result replicated). No communication.
DndArray<double> lasso_predict(const LassoModel& model, const DndArray<double>& x);

}  // namespace dnd
