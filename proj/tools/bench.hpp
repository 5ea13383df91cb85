#pragma once

#include "options.hpp"

namespace dndcli {

/// Runs warmup + timed executions of one algorithm under the loopback world
/// and prints a single JSON report line on stdout.
int run_bench(const RunOptions& options);

/// Runs the algorithm distributed and single-rank, prints the observed
/// deviations and invariant checks, and returns 0 only if everything is
/// within tolerance.
int run_verify(const RunOptions& options);

}  // namespace dndcli
