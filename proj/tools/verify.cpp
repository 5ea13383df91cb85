#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "bench.hpp"
#include "dataset.hpp"
#include "dnd/cluster.hpp"
#include "dnd/moments.hpp"
#include "dnd/pairwise.hpp"
#include "dnd/regression.hpp"

namespace dndcli {

namespace {

using dnd::index_t;

/// Accumulated deviation between two runs; rel uses |a-b| / max(1, |ref|).
struct Deviation {
    double abs = 0.0;
    double rel = 0.0;

    void update(double value, double reference) {
        const double d = std::fabs(value - reference);
        abs = std::max(abs, d);
        rel = std::max(rel, d / std::max(1.0, std::fabs(reference)));
    }

    void update(const std::vector<double>& values, const std::vector<double>& reference) {
        for (std::size_t i = 0; i < values.size(); ++i) update(values[i], reference[i]);
    }
};

struct Gate {
    bool ok = true;

    void deviation(const char* what, const Deviation& d, double tol) {
        const bool pass = d.rel <= tol;
        std::printf("  %-18s max_abs=%.3e max_rel=%.3e  %s\n", what, d.abs, d.rel,
                    pass ? "OK" : "FAIL");
        ok = ok && pass;
    }

    void flag(const char* what, bool pass) {
        std::printf("  %-18s %s\n", what, pass ? "OK" : "FAIL");
        ok = ok && pass;
    }
};

bool nonincreasing(const std::vector<double>& trace, double slack) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + slack) return false;
    return true;
}

/// Deliberately broken combiner used by --inject-combiner-fault: it drops
/// the between-chunk term of M2, so distributed variances come out wrong
/// whenever chunk means differ. Exists to prove verify catches deviations.
dnd::MomentState corrupt_combine(dnd::MomentState a, const dnd::MomentState& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    dnd::MomentState out;
    out.count = a.count + b.count;
    out.mean.resize(a.arity());
    out.m2.resize(a.arity());
    const double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
    for (std::size_t i = 0; i < a.arity(); ++i) {
        out.mean[i] = (na * a.mean[i] + nb * b.mean[i]) / (na + nb);
        out.m2[i] = a.m2[i] + b.m2[i];
    }
    return out;
}

struct MomentsResults {
    double mean = 0.0, var = 0.0, std = 0.0;
    std::vector<double> mean_cols, std_cols;
};

MomentsResults compute_moments(const RunOptions& options, const DataSpec& spec, int ranks) {
    MomentsResults out;
    dnd::run_world(ranks, [&](const dnd::Communicator& comm) {
        const Dataset data = make_dataset("moments", spec, comm);
        MomentsResults local;
        if (options.inject_combiner_fault && ranks > 1) {
            auto state = comm.allreduce(dnd::local_moments(data.x.tile()), corrupt_combine,
                                        dnd::MomentState::identity(1));
            local.mean = state.mean[0];
            local.var = state.m2[0] / static_cast<double>(state.count - options.ddof);
            local.std = std::sqrt(local.var);
        } else {
            local.mean = dnd::mean(data.x);
            local.var = dnd::var(data.x, options.ddof);
            local.std = dnd::stddev(data.x, options.ddof);
        }
        local.mean_cols = dnd::gather(dnd::mean_axis(data.x, 0));
        local.std_cols = dnd::gather(dnd::stddev_axis(data.x, 0, options.ddof));
        if (comm.rank() == 0) out = std::move(local);
    });
    return out;
}

int verify_moments(const RunOptions& options, const DataSpec& spec, Gate& gate) {
    const auto distributed = compute_moments(options, spec, options.ranks);
    const auto reference = compute_moments(options, spec, 1);

    Deviation scalars;
    scalars.update(distributed.mean, reference.mean);
    scalars.update(distributed.var, reference.var);
    scalars.update(distributed.std, reference.std);
    gate.deviation("mean/var/std", scalars, options.tol);

    Deviation columns;
    columns.update(distributed.mean_cols, reference.mean_cols);
    columns.update(distributed.std_cols, reference.std_cols);
    gate.deviation("axis-0 moments", columns, options.tol);
    return 0;
}

struct CdistResults {
    std::vector<double> distances;
    index_t n = 0;
    bool rounds_ok = true;
};

CdistResults compute_cdist(const DataSpec& spec, int ranks) {
    CdistResults out;
    dnd::run_world(ranks, [&](const dnd::Communicator& comm) {
        const Dataset data = make_dataset("cdist", spec, comm);
        const auto before = comm.counters().sendrecvs;
        auto d = dnd::cdist(data.x);
        const bool rounds_ok =
            comm.counters().sendrecvs - before == static_cast<std::uint64_t>(ranks - 1);
        auto full = dnd::gather(d);
        if (comm.rank() == 0) {
            out.distances = std::move(full);
            out.n = d.shape()[0];
        }
        const bool all_ok = comm.allreduce(
            rounds_ok, [](bool a, bool b) { return a && b; }, true);
        if (comm.rank() == 0) out.rounds_ok = all_ok;
    });
    return out;
}

int verify_cdist(const RunOptions& options, const DataSpec& spec, Gate& gate) {
    const auto distributed = compute_cdist(spec, options.ranks);
    const auto reference = compute_cdist(spec, 1);

    Deviation dev;
    dev.update(distributed.distances, reference.distances);
    gate.deviation("distances", dev, options.tol);

    const index_t n = distributed.n;
    bool diag = true, symmetric = true, nonnegative = true;
    for (index_t i = 0; i < n; ++i) {
        diag = diag && distributed.distances[static_cast<std::size_t>(i * n + i)] == 0.0;
        for (index_t j = 0; j < n; ++j) {
            const double dij = distributed.distances[static_cast<std::size_t>(i * n + j)];
            const double dji = distributed.distances[static_cast<std::size_t>(j * n + i)];
            symmetric = symmetric && std::fabs(dij - dji) <= 1e-8;
            nonnegative = nonnegative && dij >= 0.0;
        }
    }
    gate.flag("zero diagonal", diag);
    gate.flag("symmetry", symmetric);
    gate.flag("nonnegativity", nonnegative);
    gate.flag("ring rounds p-1", distributed.rounds_ok);
    return 0;
}

struct KMeansResults {
    std::vector<double> centroids;
    std::vector<double> trace;
    std::vector<std::int32_t> labels;
};

KMeansResults compute_kmeans(const RunOptions& options, const DataSpec& spec, int ranks,
                             int iters) {
    KMeansResults out;
    dnd::run_world(ranks, [&](const dnd::Communicator& comm) {
        const Dataset data = make_dataset("kmeans", spec, comm);
        auto model = dnd::kmeans_fit(data.x, options.k, iters, 0.0, options.seed);
        auto labels = dnd::gather(dnd::kmeans_predict(
            model, data.x.split() && *data.x.split() != 0 ? dnd::resplit(data.x, 0) : data.x));
        if (comm.rank() == 0) {
            out.centroids = std::move(model.centroids);
            out.trace = std::move(model.inertia_trace);
            out.labels = std::move(labels);
        }
    });
    return out;
}

int verify_kmeans(const RunOptions& options, const DataSpec& spec, Gate& gate) {
    const int iters = options.iters > 0 ? options.iters : default_iters("kmeans");
    const auto distributed = compute_kmeans(options, spec, options.ranks, iters);
    const auto reference = compute_kmeans(options, spec, 1, iters);

    Deviation centroids;
    centroids.update(distributed.centroids, reference.centroids);
    gate.deviation("centroids", centroids, options.tol);

    Deviation trace;
    trace.update(distributed.trace, reference.trace);
    gate.deviation("inertia trace", trace, options.tol);

    gate.flag("labels identical", distributed.labels == reference.labels);
    gate.flag("inertia monotone", nonincreasing(distributed.trace, 1e-9));
    return 0;
}

struct LassoResults {
    std::vector<double> weights;
    std::vector<double> trace;
    std::vector<double> x_full, y_full;  // for the normal-equations oracle
};

LassoResults compute_lasso(const RunOptions& options, const DataSpec& spec, int ranks, int iters) {
    LassoResults out;
    dnd::run_world(ranks, [&](const dnd::Communicator& comm) {
        const Dataset data = make_dataset("lasso", spec, comm);
        auto model = dnd::lasso_fit(data.x, *data.y, options.lambda, iters);
        auto x_full = dnd::gather(data.x);
        auto y_full = dnd::gather(*data.y);
        if (comm.rank() == 0) {
            out.weights = std::move(model.weights);
            out.trace = std::move(model.objective_trace);
            out.x_full = std::move(x_full);
            out.y_full = std::move(y_full);
        }
    });
    return out;
}

/// Least-squares coefficients via the normal equations (Gaussian elimination
/// with partial pivoting); independent of the coordinate-descent path.
std::vector<double> solve_normal_equations(const std::vector<double>& x, index_t n, index_t m,
                                           const std::vector<double>& y) {
    std::vector<double> a(static_cast<std::size_t>(m * m), 0.0);
    std::vector<double> b(static_cast<std::size_t>(m), 0.0);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < m; ++j) {
            const double xij = x[static_cast<std::size_t>(i * m + j)];
            b[static_cast<std::size_t>(j)] += xij * y[static_cast<std::size_t>(i)];
            for (index_t l = 0; l < m; ++l)
                a[static_cast<std::size_t>(j * m + l)] += xij * x[static_cast<std::size_t>(i * m + l)];
        }
    for (index_t col = 0; col < m; ++col) {
        index_t pivot = col;
        for (index_t r = col + 1; r < m; ++r)
            if (std::fabs(a[static_cast<std::size_t>(r * m + col)]) >
                std::fabs(a[static_cast<std::size_t>(pivot * m + col)]))
                pivot = r;
        for (index_t l = 0; l < m; ++l)
            std::swap(a[static_cast<std::size_t>(col * m + l)], a[static_cast<std::size_t>(pivot * m + l)]);
        std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
        const double diag = a[static_cast<std::size_t>(col * m + col)];
        for (index_t r = 0; r < m; ++r) {
            if (r == col) continue;
            const double factor = a[static_cast<std::size_t>(r * m + col)] / diag;
            for (index_t l = col; l < m; ++l)
                a[static_cast<std::size_t>(r * m + l)] -= factor * a[static_cast<std::size_t>(col * m + l)];
            b[static_cast<std::size_t>(r)] -= factor * b[static_cast<std::size_t>(col)];
        }
    }
    for (index_t j = 0; j < m; ++j) b[static_cast<std::size_t>(j)] /= a[static_cast<std::size_t>(j * m + j)];
    return b;
}

int verify_lasso(const RunOptions& options, const DataSpec& spec, Gate& gate) {
    const int iters = options.iters > 0 ? options.iters : default_iters("lasso");
    const auto distributed = compute_lasso(options, spec, options.ranks, iters);
    const auto reference = compute_lasso(options, spec, 1, iters);

    Deviation weights;
    weights.update(distributed.weights, reference.weights);
    gate.deviation("weights", weights, options.tol);
    gate.flag("objective monotone", nonincreasing(distributed.trace, 1e-9));

    if (options.lambda == 0.0) {
        const index_t m = static_cast<index_t>(distributed.weights.size());
        const index_t n = static_cast<index_t>(distributed.y_full.size());
        const auto exact = solve_normal_equations(distributed.x_full, n, m, distributed.y_full);
        Deviation lsq;
        lsq.update(distributed.weights, exact);
        gate.deviation("least squares", lsq, 1e-6);
    }
    return 0;
}

}  // namespace

int run_verify(const RunOptions& options) {
    const DataSpec spec = resolve_data(options);
    std::printf("verify %s ranks=%d split=%s rows=%lld cols=%lld seed=%llu tol=%.1e\n",
                options.algo.c_str(), options.ranks, options.split.c_str(),
                static_cast<long long>(spec.rows), static_cast<long long>(spec.cols),
                static_cast<unsigned long long>(options.seed), options.tol);

    Gate gate;
    if (options.algo == "moments")
        verify_moments(options, spec, gate);
    else if (options.algo == "cdist")
        verify_cdist(options, spec, gate);
    else if (options.algo == "kmeans")
        verify_kmeans(options, spec, gate);
    else
        verify_lasso(options, spec, gate);

    std::printf("result: %s\n", gate.ok ? "OK" : "FAIL");
    return gate.ok ? 0 : 1;
}

}  // namespace dndcli
