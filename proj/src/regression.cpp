#include "dnd/regression.hpp"

#include <cmath>
#include <string>

namespace dnd {

namespace {

double plus(double a, double b) { return a + b; }

std::vector<double> plus_vec(std::vector<double> acc, const std::vector<double>& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    return acc;
}

}  // namespace

double soft_threshold(double rho, double threshold) {
    if (rho > threshold) return rho - threshold;
    if (rho < -threshold) return rho + threshold;
    return 0.0;
}

LassoModel lasso_fit(const DndArray<double>& x, const DndArray<double>& y, double lambda,
                     int sweeps, double tol) {
    if (x.ndim() != 2) throw ValueError("lasso_fit: design matrix must be 2-D");
    if (y.ndim() != 1) throw ValueError("lasso_fit: targets must be 1-D");
    if (x.shape()[0] != y.shape()[0])
        throw ValueError("lasso_fit: " + std::to_string(x.shape()[0]) + " rows vs " +
                         std::to_string(y.shape()[0]) + " targets");
    if (x.shape()[0] < 1) throw ValueError("lasso_fit: need at least one sample");
    if (x.shape()[1] < 1) throw ValueError("lasso_fit: design matrix needs at least the bias column");
    if (lambda < 0.0) throw ValueError("lasso_fit: lambda must be nonnegative");
    if (sweeps < 1) throw ValueError("lasso_fit: sweeps must be positive");

    const DndArray<double> design = (x.split() && *x.split() == 0) ? x : resplit(x, 0);
    const DndArray<double> targets = (y.split() && *y.split() == 0) ? y : resplit(y, 0);
    const Communicator& comm = design.comm();

    const index_t rows = design.tile().extents[0];
    const index_t m = design.shape()[1];
    const double* mat = design.tile().data.data();

    for (index_t i = 0; i < rows; ++i)
        if (mat[static_cast<std::size_t>(i * m)] != 1.0)
            throw ValueError("lasso_fit: column 0 must be the all-ones bias column");

    // Per-column squared norms, fixed for the whole fit.
    std::vector<double> sq_local(static_cast<std::size_t>(m), 0.0);
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < m; ++j) {
            const double v = mat[static_cast<std::size_t>(i * m + j)];
            sq_local[static_cast<std::size_t>(j)] += v * v;
        }
    const std::vector<double> sq =
        comm.allreduce(sq_local, plus_vec, std::vector<double>(sq_local.size(), 0.0));

    LassoModel model;
    model.lambda = lambda;
    model.weights.assign(static_cast<std::size_t>(m), 0.0);

    // Rank-local residual r = y - Xw; with w = 0 it starts as y.
    std::vector<double> residual = targets.tile().data;

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double max_change = 0.0;
        for (index_t j = 0; j < m; ++j) {
            if (sq[static_cast<std::size_t>(j)] == 0.0) continue;  // degenerate column stays at 0

            const double w_old = model.weights[static_cast<std::size_t>(j)];
            double rho_local = 0.0;
            for (index_t i = 0; i < rows; ++i) {
                const double xij = mat[static_cast<std::size_t>(i * m + j)];
                rho_local += xij * (residual[static_cast<std::size_t>(i)] + w_old * xij);
            }
            const double rho = comm.allreduce(rho_local, plus, 0.0);

            const double w_new = (j == 0) ? rho / sq[0]
                                          : soft_threshold(rho, lambda / 2.0) /
                                                sq[static_cast<std::size_t>(j)];
            if (w_new != w_old) {
                const double shift = w_old - w_new;
                for (index_t i = 0; i < rows; ++i)
                    residual[static_cast<std::size_t>(i)] += shift * mat[static_cast<std::size_t>(i * m + j)];
                model.weights[static_cast<std::size_t>(j)] = w_new;
            }
            max_change = std::max(max_change, std::abs(w_new - w_old));
        }

        double ssr_local = 0.0;
        for (double r : residual) ssr_local += r * r;
        const double ssr = comm.allreduce(ssr_local, plus, 0.0);
        double penalty = 0.0;
        for (index_t j = 1; j < m; ++j) penalty += std::abs(model.weights[static_cast<std::size_t>(j)]);
        model.objective_trace.push_back(ssr + lambda * penalty);
        model.sweeps_run = sweep + 1;

        if (max_change < tol) break;
    }
    return model;
}

DndArray<double> lasso_predict(const LassoModel& model, const DndArray<double>& x) {
    if (x.ndim() != 2) throw ValueError("lasso_predict: input must be 2-D");
    if (x.shape()[1] != static_cast<index_t>(model.weights.size()))
        throw ValueError("lasso_predict: input has " + std::to_string(x.shape()[1]) +
                         " columns, model expects " + std::to_string(model.weights.size()));
    if (x.split() && *x.split() != 0)
        throw ValueError("lasso_predict: input must be split=0 or replicated");

    const index_t rows = x.tile().extents[0];
    const index_t m = x.shape()[1];
    std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
    const double* mat = x.tile().data.data();
    for (index_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (index_t j = 0; j < m; ++j)
            acc += mat[static_cast<std::size_t>(i * m + j)] * model.weights[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    Tile<double> tile{{rows}, std::move(out)};
    return DndArray<double>({x.shape()[0]}, x.split() ? std::optional<int>(0) : std::nullopt,
                            x.comm(), std::move(tile));
}

}  // namespace dnd
