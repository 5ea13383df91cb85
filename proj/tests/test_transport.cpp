#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cstring>
#include <thread>

#include "dnd/transport.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using dnd::Communicator;
using dnd::run_world;
using testutil::collect_per_rank;
using testutil::short_timeout;

TEST_CASE("send/recv transfers the payload unchanged") {
    auto results = collect_per_rank<std::vector<double>>(2, [](const Communicator& comm) {
        if (comm.rank() == 0) {
            comm.send<double>(1, {1.0, 2.0});
            return std::vector<double>{};
        }
        return comm.recv<double>(0);
    });
    CHECK(results[1] == std::vector<double>{1.0, 2.0});
}

TEST_CASE("messages between a pair arrive in send order") {
    auto results = collect_per_rank<std::vector<double>>(2, [](const Communicator& comm) {
        if (comm.rank() == 0) {
            comm.send<double>(1, {1.0});
            comm.send<double>(1, {2.0});
            return std::vector<double>{};
        }
        auto first = comm.recv<double>(0);
        auto second = comm.recv<double>(0);
        first.insert(first.end(), second.begin(), second.end());
        return first;
    });
    CHECK(results[1] == std::vector<double>{1.0, 2.0});
}

TEST_CASE("ring shift rotates buffers by one rank") {
    const int p = 3;
    auto results = collect_per_rank<std::vector<double>>(p, [p](const Communicator& comm) {
        const int r = comm.rank();
        return comm.sendrecv<double>((r + 1) % p, {static_cast<double>(r)}, (r + p - 1) % p);
    });
    for (int r = 0; r < p; ++r)
        CHECK(results[static_cast<std::size_t>(r)] ==
              std::vector<double>{static_cast<double>((r + p - 1) % p)});
}

TEST_CASE("self sendrecv returns the own buffer") {
    auto results = collect_per_rank<std::vector<double>>(1, [](const Communicator& comm) {
        return comm.sendrecv<double>(0, {4.0, 2.0}, 0);
    });
    CHECK(results[0] == std::vector<double>{4.0, 2.0});
}

TEST_CASE("p consecutive ring shifts bring every buffer home") {
    const int p = 4;
    auto results = collect_per_rank<std::vector<double>>(p, [p](const Communicator& comm) {
        const int r = comm.rank();
        std::vector<double> buf{10.0 + r, 20.0 + r};
        const auto original = buf;
        for (int round = 0; round < p; ++round)
            buf = comm.sendrecv<double>((r + 1) % p, std::move(buf), (r + p - 1) % p);
        REQUIRE(buf == original);
        return buf;
    });
    CHECK(results.size() == static_cast<std::size_t>(p));
}

TEST_CASE("allreduce sums across ranks") {
    auto results = collect_per_rank<double>(3, [](const Communicator& comm) {
        return comm.allreduce(
            static_cast<double>(comm.rank() + 1), [](double a, double b) { return a + b; }, 0.0);
    });
    for (double v : results) CHECK(v == 6.0);
}

TEST_CASE("allreduce on a single rank returns the local value") {
    auto results = collect_per_rank<double>(1, [](const Communicator& comm) {
        return comm.allreduce(
            7.5, [](double a, double b) { return a + b; }, 0.0);
    });
    CHECK(results[0] == 7.5);
}

TEST_CASE("allreduce results are bitwise identical on every rank") {
    const int p = 4;
    auto results = collect_per_rank<double>(p, [](const Communicator& comm) {
        oracle::Rng rng(1000 + static_cast<std::uint64_t>(comm.rank()));
        // Values chosen so the fold order matters in floating point.
        const double local = rng.uniform() * std::pow(10.0, comm.rank());
        return comm.allreduce(
            local, [](double a, double b) { return a + b; }, 0.0);
    });
    for (int r = 1; r < p; ++r)
        CHECK(std::memcmp(&results[0], &results[static_cast<std::size_t>(r)], sizeof(double)) == 0);
}

TEST_CASE("allgather_varying keeps rank order with uneven lengths") {
    auto results = collect_per_rank<std::vector<std::vector<double>>>(3, [](const Communicator& comm) {
        std::vector<double> local(static_cast<std::size_t>(comm.rank() == 1 ? 2 : 1),
                                  static_cast<double>(comm.rank()));
        return comm.allgather_varying(std::move(local));
    });
    const std::vector<std::vector<double>> expected{{0.0}, {1.0, 1.0}, {2.0}};
    for (const auto& per_rank : results) CHECK(per_rank == expected);
}

TEST_CASE("allgather_varying on a single rank wraps the local buffer") {
    auto results = collect_per_rank<std::vector<std::vector<double>>>(1, [](const Communicator& comm) {
        return comm.allgather_varying<double>({3.0});
    });
    CHECK(results[0] == std::vector<std::vector<double>>{{3.0}});
}

TEST_CASE("alltoall_varying transposes payload ownership") {
    auto results = collect_per_rank<std::vector<std::vector<double>>>(2, [](const Communicator& comm) {
        std::vector<std::vector<double>> parts;
        if (comm.rank() == 0)
            parts = {{1.0}, {2.0}};
        else
            parts = {{3.0}, {4.0}};
        return comm.alltoall_varying(std::move(parts));
    });
    CHECK(results[0] == std::vector<std::vector<double>>{{1.0}, {3.0}});
    CHECK(results[1] == std::vector<std::vector<double>>{{2.0}, {4.0}});
}

TEST_CASE("alltoall_varying of empty parts stays empty") {
    auto results = collect_per_rank<std::vector<std::vector<double>>>(3, [](const Communicator& comm) {
        std::vector<std::vector<double>> parts(3);
        return comm.alltoall_varying(std::move(parts));
    });
    for (const auto& per_rank : results)
        for (const auto& buf : per_rank) CHECK(buf.empty());
}

TEST_CASE("double alltoall_varying is the identity on payloads") {
    const int p = 4;
    auto results = collect_per_rank<int>(p, [p](const Communicator& comm) {
        oracle::Rng rng(77 + static_cast<std::uint64_t>(comm.rank()));
        std::vector<std::vector<double>> parts(static_cast<std::size_t>(p));
        for (auto& part : parts) part = rng.vector(static_cast<std::size_t>(rng.below(5)));
        const auto original = parts;
        auto once = comm.alltoall_varying(std::move(parts));
        auto twice = comm.alltoall_varying(std::move(once));
        return twice == original ? 1 : 0;
    });
    for (int ok : results) CHECK(ok == 1);
}

TEST_CASE("barrier releases only after the slowest rank entered") {
    using clock = std::chrono::steady_clock;
    struct Stamp {
        clock::time_point before, after;
    };
    auto results = collect_per_rank<Stamp>(3, [](const Communicator& comm) {
        std::this_thread::sleep_for(std::chrono::milliseconds(60 * comm.rank()));
        Stamp stamp;
        stamp.before = clock::now();
        comm.barrier();
        stamp.after = clock::now();
        return stamp;
    });
    auto last_entry = results[0].before;
    for (const auto& s : results) last_entry = std::max(last_entry, s.before);
    for (const auto& s : results) CHECK(s.after >= last_entry);
}

TEST_CASE("mismatched collectives are a fatal ordering error") {
    CHECK_THROWS_AS(run_world(2,
                              [](const Communicator& comm) {
                                  if (comm.rank() == 0)
                                      comm.barrier();
                                  else
                                      comm.allreduce(
                                          1.0, [](double a, double b) { return a + b; }, 0.0);
                              }),
                    dnd::OrderingError);
}

TEST_CASE("a rank skipping a collective is detected when it terminates") {
    CHECK_THROWS_AS(run_world(2,
                              [](const Communicator& comm) {
                                  if (comm.rank() == 0) comm.barrier();
                              }),
                    dnd::OrderingError);
}

TEST_CASE("recv with no matching send fails fast once the sender exits") {
    CHECK_THROWS_AS(run_world(2,
                              [](const Communicator& comm) {
                                  if (comm.rank() == 1) comm.recv<double>(0);
                              }),
                    dnd::TransportError);
}

TEST_CASE("recv from a busy sender times out after the configured window") {
    CHECK_THROWS_AS(run_world(2,
                              [](const Communicator& comm) {
                                  if (comm.rank() == 1) {
                                      comm.recv<double>(0);
                                  } else {
                                      std::this_thread::sleep_for(std::chrono::milliseconds(600));
                                  }
                              },
                              short_timeout(120)),
                    dnd::TimeoutError);
}

TEST_CASE("mutual recv deadlock is reported as a timeout naming the ranks") {
    try {
        run_world(2, [](const Communicator& comm) { comm.recv<double>(1 - comm.rank()); },
                  short_timeout(120));
        FAIL("expected a timeout");
    } catch (const dnd::TimeoutError& e) {
        const std::string what = e.what();
        CHECK(what.find("rank") != std::string::npos);
    }
}

TEST_CASE("payload type mismatches are fatal") {
    CHECK_THROWS_AS(run_world(2,
                              [](const Communicator& comm) {
                                  if (comm.rank() == 0)
                                      comm.send<double>(1, {1.0});
                                  else
                                      comm.recv<float>(0);
                              }),
                    dnd::OrderingError);
}

TEST_CASE("peer validation") {
    run_world(2, [](const Communicator& comm) {
        if (comm.rank() == 0) {
            CHECK_THROWS_AS(comm.send<double>(2, {1.0}), dnd::ValueError);
            CHECK_THROWS_AS(comm.send<double>(0, {1.0}), dnd::ValueError);
            CHECK_THROWS_AS(comm.recv<double>(0), dnd::ValueError);
            CHECK_THROWS_AS(comm.alltoall_varying<double>({{1.0}}), dnd::ValueError);
        }
    });
}

TEST_CASE("a size-1 world runs every collective as a local identity") {
    run_world(1, [](const Communicator& comm) {
        comm.barrier();
        CHECK(comm.allreduce(3.0, [](double a, double b) { return a + b; }, 0.0) == 3.0);
        CHECK(comm.allgather_varying<double>({1.0, 2.0}) ==
              std::vector<std::vector<double>>{{1.0, 2.0}});
        CHECK(comm.alltoall_varying<double>({{5.0}}) == std::vector<std::vector<double>>{{5.0}});
    });
}

TEST_CASE("counters track per-rank calls") {
    auto results = collect_per_rank<dnd::TransportCounters>(2, [](const Communicator& comm) {
        comm.barrier();
        comm.allreduce(1.0, [](double a, double b) { return a + b; }, 0.0);
        comm.sendrecv<double>(1 - comm.rank(), {1.0}, 1 - comm.rank());
        if (comm.rank() == 0) {
            comm.send<double>(1, {2.0});
        } else {
            comm.recv<double>(0);
        }
        return comm.counters();
    });
    CHECK(results[0].barriers == 1);
    CHECK(results[0].allreduces == 1);
    CHECK(results[0].sendrecvs == 1);
    CHECK(results[0].sends == 1);
    CHECK(results[1].recvs == 1);
}

TEST_CASE("DND_TIMEOUT_SECS overrides the default deadlock timeout") {
    setenv("DND_TIMEOUT_SECS", "1.5", 1);
    CHECK(dnd::WorldOptions::from_env().timeout == std::chrono::milliseconds(1500));
    setenv("DND_TIMEOUT_SECS", "not-a-number", 1);
    CHECK(dnd::WorldOptions::from_env().timeout == std::chrono::milliseconds(30000));
    unsetenv("DND_TIMEOUT_SECS");
    CHECK(dnd::WorldOptions::from_env().timeout == std::chrono::milliseconds(30000));
}

TEST_CASE("worker exceptions surface after all ranks joined") {
    CHECK_THROWS_AS(run_world(3,
                              [](const Communicator& comm) {
                                  if (comm.rank() == 2) throw dnd::ValueError("boom");
                                  comm.barrier();
                              }),
                    dnd::ValueError);
}
