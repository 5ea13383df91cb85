#include "bench.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "json.hpp"

#include "dataset.hpp"
#include "dnd/cluster.hpp"
#include "dnd/moments.hpp"
#include "dnd/pairwise.hpp"
#include "dnd/regression.hpp"
#include "dnd/transport.hpp"

namespace dndcli {

namespace {

using nlohmann::json;

/// One timed execution of the selected algorithm; the return value keeps the
/// result alive across the timing bracket.
double run_algorithm(const RunOptions& options, const Dataset& data, std::optional<int> axis,
                     int iters) {
    if (options.algo == "moments") {
        if (axis) {
            auto m = dnd::mean_axis(data.x, *axis);
            auto s = dnd::stddev_axis(data.x, *axis, options.ddof);
            return m.tile().data.empty() ? 0.0 : m.tile().data[0] + s.tile().data[0];
        }
        return dnd::mean(data.x) + dnd::stddev(data.x, options.ddof);
    }
    if (options.algo == "cdist") {
        auto d = dnd::cdist(data.x);
        return d.tile().data.empty() ? 0.0 : d.tile().data.back();
    }
    if (options.algo == "kmeans") {
        auto model = dnd::kmeans_fit(data.x, options.k, iters, 0.0, options.seed);
        return model.inertia_trace.back();
    }
    auto model = dnd::lasso_fit(data.x, *data.y, options.lambda, iters);
    return model.objective_trace.back();
}

void validate_before_timing(const RunOptions& options, const Dataset& data, int iters) {
    if (options.algo == "moments" || options.algo == "cdist") {
        if (data.x.ndim() != 2) throw dnd::ValueError(options.algo + ": data must be 2-D");
    }
    if (options.algo == "cdist" && data.x.shape()[0] == 0)
        throw dnd::ValueError("cdist: data has no rows");
    if (options.algo == "kmeans") {
        if (data.x.ndim() != 2) throw dnd::ValueError("kmeans: data must be 2-D");
        if (static_cast<dnd::index_t>(options.k) > data.x.shape()[0])
            throw dnd::ValueError("kmeans: k=" + std::to_string(options.k) + " exceeds " +
                                  std::to_string(data.x.shape()[0]) + " samples");
    }
    if (iters < 1) throw dnd::ValueError("--iters must be positive");
    if (options.runs < 1) throw dnd::ValueError("--runs must be at least 1");
    if (options.warmup < 0) throw dnd::ValueError("--warmup must be nonnegative");
}

json params_json(const RunOptions& options, const Dataset& data, std::optional<int> axis,
                 int iters) {
    json params;
    params["seed"] = options.seed;
    params["rows"] = data.x.shape()[0];
    params["cols"] = data.x.ndim() > 1 ? data.x.shape()[1] : 1;
    if (options.algo == "moments") {
        params["axis"] = axis ? json(*axis) : json(nullptr);
        params["ddof"] = options.ddof;
    } else if (options.algo == "kmeans") {
        params["k"] = options.k;
        params["iters"] = iters;
    } else if (options.algo == "lasso") {
        params["lambda"] = options.lambda;
        params["iters"] = iters;
    }
    return params;
}

}  // namespace

int run_bench(const RunOptions& options) {
    if (options.out != "json")
        throw dnd::ValueError("--out supports only \"json\", got \"" + options.out + "\"");
    const DataSpec spec = resolve_data(options);
    const std::optional<int> axis = parse_axis(options.axis);
    const int iters = options.iters > 0 ? options.iters : default_iters(options.algo);

    std::vector<double> run_seconds;
    json params;

    dnd::run_world(options.ranks, [&](const dnd::Communicator& comm) {
        const Dataset data = make_dataset(options.algo, spec, comm);
        validate_before_timing(options, data, iters);
        if (comm.rank() == 0) params = params_json(options, data, axis, iters);

        double sink = 0.0;
        for (int w = 0; w < options.warmup; ++w) sink += run_algorithm(options, data, axis, iters);

        for (int run = 0; run < options.runs; ++run) {
            comm.barrier();
            const auto start = std::chrono::steady_clock::now();
            sink += run_algorithm(options, data, axis, iters);
            comm.barrier();
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            // Report the slowest rank of each run.
            const double worst = comm.allreduce(
                elapsed.count(), [](double a, double b) { return a > b ? a : b; }, 0.0);
            if (comm.rank() == 0) run_seconds.push_back(worst);
        }
        if (!std::isfinite(sink)) throw dnd::ValueError("benchmark produced non-finite results");
    });

    // Timing statistics via the moments module itself.
    dnd::Tile<double> times{{static_cast<dnd::index_t>(run_seconds.size())}, run_seconds};
    const dnd::MomentState stats = dnd::local_moments(times);

    json report;
    report["algo"] = options.algo;
    report["ranks"] = options.ranks;
    report["split"] = spec.split ? json(*spec.split) : json("none");
    report["params"] = params;
    report["warmup_runs"] = options.warmup;
    report["timed_runs"] = options.runs;
    report["mean_seconds"] = stats.mean[0];
    report["std_seconds"] = std::sqrt(stats.m2[0] / static_cast<double>(stats.count));
    std::cout << report.dump() << "\n";
    return 0;
}

}  // namespace dndcli
