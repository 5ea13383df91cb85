#pragma once

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "dnd/transport.hpp"

namespace testutil {

/// Runs `fn` on every rank of a fresh loopback world and returns the
/// per-rank results indexed by rank. R must be default-constructible.
template <typename R, typename F>
std::vector<R> collect_per_rank(int ranks, F fn,
                                dnd::WorldOptions options = dnd::WorldOptions::from_env()) {
    std::vector<R> results(static_cast<std::size_t>(ranks));
    dnd::run_world(
        ranks, [&](const dnd::Communicator& comm) { results[static_cast<std::size_t>(comm.rank())] = fn(comm); },
        options);
    return results;
}

inline dnd::WorldOptions short_timeout(int millis) {
    dnd::WorldOptions options;
    options.timeout = std::chrono::milliseconds(millis);
    return options;
}

/// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("dnd_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
