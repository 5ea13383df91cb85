#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bench.hpp"
#include "dnd/dataio.hpp"
#include "options.hpp"

namespace {

void add_run_flags(CLI::App* cmd, dndcli::RunOptions& options) {
    cmd->add_option("algo", options.algo, "algorithm: moments, cdist, kmeans or lasso")
        ->required()
        ->check(CLI::IsMember({"moments", "cdist", "kmeans", "lasso"}));
    cmd->add_option("--ranks", options.ranks, "loopback world size (default: env DND_RANKS or 1)");
    cmd->add_option("--data", options.data_path, "DNB dataset path");
    cmd->add_option("--synthetic", options.synthetic, "synthetic matrix shape, e.g. 600x8");
    cmd->add_option("--samples", options.samples, "synthetic sample count with 18 features");
    cmd->add_option("--seed", options.seed, "seed for synthetic data and k-means init");
    cmd->add_option("--split", options.split, "input split axis: 0, 1 or none")
        ->check(CLI::IsMember({"0", "1", "none"}));
    cmd->add_option("--axis", options.axis, "moments reduction axis: 0, 1 or none")
        ->check(CLI::IsMember({"0", "1", "none"}));
    cmd->add_option("--k", options.k, "number of k-means centroids");
    cmd->add_option("--iters", options.iters, "iterations/sweeps (default: 30 k-means, 20 lasso)");
    cmd->add_option("--lambda", options.lambda, "LASSO regularization strength");
    cmd->add_option("--ddof", options.ddof, "delta degrees of freedom for var/std");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dnd - distributed n-dimensional arrays on an in-process loopback world"};
    app.require_subcommand(1);

    // convert
    std::string csv_src, dnb_dst, dtype_name = "f64";
    bool skip_header = false;
    auto* convert = app.add_subcommand("convert", "convert a numeric CSV file to DNB");
    convert->add_option("src", csv_src, "input CSV path")->required();
    convert->add_option("dst", dnb_dst, "output DNB path")->required();
    convert->add_option("--dtype", dtype_name, "element type of the container")
        ->check(CLI::IsMember({"f32", "f64"}));
    convert->add_flag("--skip-header", skip_header, "ignore the first line");

    // bench
    dndcli::RunOptions bench_options;
    auto* bench = app.add_subcommand("bench", "time an algorithm and print a JSON report line");
    add_run_flags(bench, bench_options);
    bench->add_option("--warmup", bench_options.warmup, "untimed warmup runs");
    bench->add_option("--runs", bench_options.runs, "timed runs");
    bench->add_option("--out", bench_options.out, "report format (json)");

    // verify
    dndcli::RunOptions verify_options;
    auto* verify = app.add_subcommand("verify", "compare a distributed run against a single rank");
    add_run_flags(verify, verify_options);
    verify->add_option("--tol", verify_options.tol, "largest accepted relative deviation");
    verify
        ->add_flag("--inject-combiner-fault", verify_options.inject_combiner_fault,
                   "testing hook: corrupt the moments combiner to force a deviation")
        ->group("");  // hidden

    CLI11_PARSE(app, argc, argv);

    try {
        if (convert->parsed()) {
            dnd::csv_to_dnb(csv_src, dnb_dst,
                            dtype_name == "f32" ? dnd::DnbDtype::f32 : dnd::DnbDtype::f64,
                            skip_header);
            const auto header = dnd::dnb_read_header(dnb_dst);
            std::cerr << "wrote " << dnb_dst << " (" << header.extents[0] << "x"
                      << header.extents[1] << ", " << dtype_name << ")\n";
            return 0;
        }
        if (bench->parsed()) return dndcli::run_bench(bench_options);
        return dndcli::run_verify(verify_options);
    } catch (const dnd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
