#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

#include "dataset.hpp"
#include "dnd/errors.hpp"

namespace dndcli {

inline int ranks_from_env() {
    if (const char* env = std::getenv("DND_RANKS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

/// Flags shared by the bench and verify subcommands.
struct RunOptions {
    std::string algo;
    int ranks = ranks_from_env();
    std::string data_path;
    std::string synthetic;  // "ROWSxCOLS"
    std::int64_t samples = 0;
    std::uint64_t seed = 42;
    std::string split = "0";
    std::string axis = "none";
    int k = 8;
    int iters = 0;  // 0 = per-algorithm default
    double lambda = 0.1;
    std::int64_t ddof = 0;
    int warmup = 1;
    int runs = 9;
    std::string out = "json";
    double tol = 1e-10;
    bool inject_combiner_fault = false;
};

inline std::optional<int> parse_split(const std::string& text) {
    if (text == "none") return std::nullopt;
    if (text == "0") return 0;
    if (text == "1") return 1;
    throw dnd::ValueError("--split must be 0, 1 or none, got \"" + text + "\"");
}

inline std::optional<int> parse_axis(const std::string& text) {
    if (text == "none") return std::nullopt;
    if (text == "0") return 0;
    if (text == "1") return 1;
    throw dnd::ValueError("--axis must be 0, 1 or none, got \"" + text + "\"");
}

inline void parse_shape(const std::string& text, std::int64_t& rows, std::int64_t& cols) {
    const auto x = text.find('x');
    if (x == std::string::npos)
        throw dnd::ValueError("--synthetic expects ROWSxCOLS, got \"" + text + "\"");
    try {
        rows = std::stoll(text.substr(0, x));
        cols = std::stoll(text.substr(x + 1));
    } catch (const std::exception&) {
        throw dnd::ValueError("--synthetic expects ROWSxCOLS, got \"" + text + "\"");
    }
    if (rows < 0 || cols < 0) throw dnd::ValueError("--synthetic extents must be nonnegative");
}

/// Resolves the data flags into a concrete data source, applying per-algorithm
/// default shapes when nothing was requested.
inline DataSpec resolve_data(const RunOptions& options) {
    DataSpec spec;
    spec.seed = options.seed;
    spec.split = parse_split(options.split);
    if (!options.data_path.empty()) {
        spec.path = options.data_path;
        return spec;
    }
    if (options.samples > 0) {
        spec.rows = options.samples;
        spec.cols = 18;
        return spec;
    }
    if (!options.synthetic.empty()) {
        parse_shape(options.synthetic, spec.rows, spec.cols);
        return spec;
    }
    if (options.algo == "moments") {
        spec.rows = 300;
        spec.cols = 1000;
    } else if (options.algo == "cdist") {
        spec.rows = 2000;
        spec.cols = 18;
    } else if (options.algo == "kmeans") {
        spec.rows = 600;
        spec.cols = 8;
    } else {
        spec.rows = 1000;
        spec.cols = 21;
    }
    return spec;
}

inline int default_iters(const std::string& algo) { return algo == "lasso" ? 20 : 30; }

}  // namespace dndcli
