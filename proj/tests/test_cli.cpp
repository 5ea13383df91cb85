#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"
#include "support/testutil.hpp"

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, bool mute_stderr = true) {
    const std::string cmd =
        std::string(DND_CLI_PATH) + " " + args + (mute_stderr ? " 2>/dev/null" : "");
    CliResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buffer;
    while (std::fgets(buffer.data(), buffer.size(), pipe) != nullptr) result.out += buffer.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

nlohmann::json parse_report(const std::string& text) {
    auto report = nlohmann::json::parse(text);
    REQUIRE(report.is_object());
    return report;
}

}  // namespace

TEST_CASE("bench kmeans emits the protocol parameters") {
    const auto result = run_cli("bench kmeans --synthetic 600x8 --k 8 --iters 30 --ranks 4 --runs 2");
    REQUIRE(result.exit_code == 0);
    const auto report = parse_report(result.out);
    CHECK(report["algo"] == "kmeans");
    CHECK(report["ranks"] == 4);
    CHECK(report["params"]["k"] == 8);
    CHECK(report["params"]["iters"] == 30);
    CHECK(report["timed_runs"] == 2);
    CHECK(report["mean_seconds"].is_number());
    CHECK(report["std_seconds"].is_number());
}

TEST_CASE("bench defaults to one warmup and nine timed runs") {
    const auto result = run_cli("bench moments --synthetic 60x50 --ranks 2");
    REQUIRE(result.exit_code == 0);
    const auto report = parse_report(result.out);
    CHECK(report["warmup_runs"] == 1);
    CHECK(report["timed_runs"] == 9);
    CHECK(report["params"]["axis"].is_null());
}

TEST_CASE("bench handles the degenerate single-sample cdist") {
    const auto result = run_cli("bench cdist --synthetic 1x5 --ranks 2 --runs 1");
    REQUIRE(result.exit_code == 0);
    const auto report = parse_report(result.out);
    CHECK(report["algo"] == "cdist");
    CHECK(report["mean_seconds"].get<double>() < 1.0);
}

TEST_CASE("DND_RANKS sets the world size when --ranks is absent") {
    const std::string cmd = "DND_RANKS=3 " + std::string(DND_CLI_PATH) +
                            " bench moments --synthetic 30x5 --runs 1 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buffer;
    while (std::fgets(buffer.data(), buffer.size(), pipe) != nullptr) out += buffer.data();
    REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
    CHECK(parse_report(out)["ranks"] == 3);
}

TEST_CASE("--samples builds an 18-feature matrix") {
    const auto result = run_cli("bench cdist --samples 50 --ranks 2 --runs 1");
    REQUIRE(result.exit_code == 0);
    const auto report = parse_report(result.out);
    CHECK(report["params"]["rows"] == 50);
    CHECK(report["params"]["cols"] == 18);
}

TEST_CASE("bench honors split=none and axis flags") {
    const auto result =
        run_cli("bench moments --synthetic 40x30 --split none --axis 0 --ranks 2 --runs 1");
    REQUIRE(result.exit_code == 0);
    const auto report = parse_report(result.out);
    CHECK(report["split"] == "none");
    CHECK(report["params"]["axis"] == 0);
}

TEST_CASE("shape problems are reported before any timing") {
    const auto result = run_cli("bench kmeans --synthetic 4x2 --k 8 --runs 1", false);
    CHECK(result.exit_code == 2);
}

TEST_CASE("unknown flags fail") {
    const auto result = run_cli("bench kmeans --definitely-not-a-flag 3");
    CHECK(result.exit_code != 0);
}

TEST_CASE("verify accepts every algorithm on small instances") {
    CHECK(run_cli("verify moments --synthetic 100x18 --ranks 3").exit_code == 0);
    CHECK(run_cli("verify cdist --synthetic 50x6 --ranks 3").exit_code == 0);
    CHECK(run_cli("verify kmeans --synthetic 120x5 --k 4 --iters 10 --ranks 3").exit_code == 0);
    CHECK(run_cli("verify lasso --synthetic 80x6 --lambda 0.5 --ranks 3").exit_code == 0);
}

TEST_CASE("verify lasso with lambda 0 passes the least-squares gate") {
    const auto result = run_cli("verify lasso --synthetic 60x5 --lambda 0 --iters 400 --ranks 2");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("least squares") != std::string::npos);
}

TEST_CASE("a corrupted combiner makes verify fail") {
    const auto result =
        run_cli("verify moments --synthetic 100x18 --ranks 3 --inject-combiner-fault");
    CHECK(result.exit_code == 1);
    CHECK(result.out.find("FAIL") != std::string::npos);
}

TEST_CASE("convert feeds bench and verify") {
    const auto dir = testutil::scratch_dir("cli");
    const auto csv = dir / "data.csv";
    {
        std::ofstream out(csv);
        for (int i = 0; i < 40; ++i)
            out << (i % 7) * 0.5 << "," << (i % 5) * 1.25 << "," << (i % 3) * 2.0 << "\n";
    }
    const auto dnb = dir / "data.dnb";
    REQUIRE(run_cli("convert " + csv.string() + " " + dnb.string()).exit_code == 0);

    const auto bench = run_cli("bench moments --data " + dnb.string() + " --ranks 2 --runs 1");
    REQUIRE(bench.exit_code == 0);
    const auto report = parse_report(bench.out);
    CHECK(report["params"]["rows"] == 40);
    CHECK(report["params"]["cols"] == 3);

    CHECK(run_cli("verify moments --data " + dnb.string() + " --ranks 3").exit_code == 0);
    CHECK(run_cli("verify lasso --data " + dnb.string() + " --lambda 0.1 --ranks 2").exit_code == 0);

    const auto missing = run_cli("bench moments --data " + (dir / "nope.dnb").string(), false);
    CHECK(missing.exit_code == 2);
}
