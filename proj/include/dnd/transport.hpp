#pragma once

#include <any>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dnd/errors.hpp"

namespace dnd {

enum class BackendKind { loopback, external };

/// Per-rank tally of transport calls, for tests and instrumentation.
struct TransportCounters {
    std::uint64_t sends = 0;
    std::uint64_t recvs = 0;
    std::uint64_t sendrecvs = 0;
    std::uint64_t allreduces = 0;
    std::uint64_t allgathers = 0;
    std::uint64_t alltoalls = 0;
    std::uint64_t barriers = 0;
};

struct WorldOptions {
    /// Deadlock-detection timeout for blocking operations.
    std::chrono::milliseconds timeout{30000};

    /// Default options; DND_TIMEOUT_SECS overrides the timeout.
    static WorldOptions from_env();
};

namespace detail {

enum class CollectiveKind : std::uint8_t { allreduce, allgather, alltoall, barrier };

const char* collective_name(CollectiveKind kind);

/// Shared state of an in-process world: mailboxes for point-to-point traffic
/// and a rendezvous table keyed by per-rank collective call index. One
/// instance serves all rank handles of a run.
class LoopbackWorld {
public:
    LoopbackWorld(int size, WorldOptions options);

    int size() const { return size_; }

    void p2p_send(int src, int dst, std::any payload);
    std::any p2p_recv(int dst, int src);

    /// Generic rendezvous: blocks until every rank has contributed to the
    /// collective with this rank's next call index, then returns all
    /// contributions ordered by rank. Mismatched kinds at the same call index
    /// are a fatal program-order violation.
    std::shared_ptr<const std::vector<std::any>> collect(int rank, CollectiveKind kind,
                                                         std::any contribution);

    void mark_done(int rank);
    void abort() noexcept;

    TransportCounters& counters(int rank) { return counters_[static_cast<std::size_t>(rank)]; }

private:
    struct Slot;

    struct State;
    std::unique_ptr<State> state_;
    int size_;
    std::chrono::milliseconds timeout_;
    std::vector<TransportCounters> counters_;
};

}  // namespace detail

/// Rank-local handle to a message-passing world.
///
/// All collective operations must be invoked by every rank of the world in
/// the same program order; divergence is detected and reported as a fatal
/// OrderingError. Payloads are value-moved: a sender may not observe a buffer
/// after handing it to the transport.
class Communicator {
public:
    Communicator(std::shared_ptr<detail::LoopbackWorld> world, int rank)
        : world_(std::move(world)), rank_(rank) {}

    int rank() const { return rank_; }
    int size() const { return world_->size(); }
    BackendKind backend() const { return BackendKind::loopback; }

    /// True when both handles refer to the same rank of the same world.
    bool congruent(const Communicator& other) const {
        return world_ == other.world_ && rank_ == other.rank_;
    }

    /// Snapshot of this rank's call counters.
    TransportCounters counters() const { return world_->counters(rank_); }

    /// Delivers a contiguous buffer to `dest`. Messages between a fixed
    /// (source, destination) pair arrive in send order.
    template <typename T>
    void send(int dest, std::vector<T> payload) const {
        check_peer(dest, /*allow_self=*/false, "send");
        world_->counters(rank_).sends++;
        world_->p2p_send(rank_, dest, std::any(std::move(payload)));
    }

    /// Blocks for the next buffer from `src`; fatal timeout on deadlock.
    template <typename T>
    std::vector<T> recv(int src) const {
        check_peer(src, /*allow_self=*/false, "recv");
        world_->counters(rank_).recvs++;
        return take<std::vector<T>>(world_->p2p_recv(rank_, src), src);
    }

    /// Simultaneous exchange: ships `payload` to `dest` and returns the
    /// buffer sent by `src`. Safe for cyclic patterns (ring shifts) and for
    /// dest == src == self.
    template <typename T>
    std::vector<T> sendrecv(int dest, std::vector<T> payload, int src) const {
        check_peer(dest, /*allow_self=*/true, "sendrecv");
        check_peer(src, /*allow_self=*/true, "sendrecv");
        world_->counters(rank_).sendrecvs++;
        world_->p2p_send(rank_, dest, std::any(std::move(payload)));
        return take<std::vector<T>>(world_->p2p_recv(rank_, src), src);
    }

    /// Reduces one value per rank with a user-supplied combiner. The fold
    /// runs in fixed rank order 0..size-1 starting from `identity`, so every
    /// rank computes a bit-identical result. `combine` must be associative
    /// and commutative up to floating-point tolerance and is invoked as
    /// combine(accumulator, value) -> accumulator.
    template <typename T, typename Combine>
    T allreduce(const T& local, Combine combine, T identity) const {
        world_->counters(rank_).allreduces++;
        auto all = world_->collect(rank_, detail::CollectiveKind::allreduce, std::any(local));
        T acc = std::move(identity);
        for (int r = 0; r < size(); ++r) {
            const T* value = std::any_cast<T>(&(*all)[static_cast<std::size_t>(r)]);
            if (value == nullptr)
                throw OrderingError("allreduce: payload type mismatch between ranks");
            acc = combine(std::move(acc), *value);
        }
        return acc;
    }

    /// Every rank receives every rank's buffer, indexable by source rank.
    /// Per-rank lengths may differ.
    template <typename T>
    std::vector<std::vector<T>> allgather_varying(std::vector<T> local) const {
        world_->counters(rank_).allgathers++;
        auto all = world_->collect(rank_, detail::CollectiveKind::allgather,
                                   std::any(std::move(local)));
        std::vector<std::vector<T>> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (int r = 0; r < size(); ++r) {
            const auto* value = std::any_cast<std::vector<T>>(&(*all)[static_cast<std::size_t>(r)]);
            if (value == nullptr)
                throw OrderingError("allgather_varying: payload type mismatch between ranks");
            out.push_back(*value);
        }
        return out;
    }

    /// parts[d] is the payload this rank sends to rank d; returned[s] is the
    /// payload rank s addressed to this rank — a transpose of ownership.
    template <typename T>
    std::vector<std::vector<T>> alltoall_varying(std::vector<std::vector<T>> parts) const {
        if (static_cast<int>(parts.size()) != size())
            throw ValueError("alltoall_varying: expected " + std::to_string(size()) +
                             " parts, got " + std::to_string(parts.size()));
        world_->counters(rank_).alltoalls++;
        auto all = world_->collect(rank_, detail::CollectiveKind::alltoall,
                                   std::any(std::move(parts)));
        std::vector<std::vector<T>> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (int r = 0; r < size(); ++r) {
            const auto* sent =
                std::any_cast<std::vector<std::vector<T>>>(&(*all)[static_cast<std::size_t>(r)]);
            if (sent == nullptr)
                throw OrderingError("alltoall_varying: payload type mismatch between ranks");
            out.push_back((*sent)[static_cast<std::size_t>(rank_)]);
        }
        return out;
    }

    /// Returns only after every rank of the world has entered.
    void barrier() const {
        world_->counters(rank_).barriers++;
        world_->collect(rank_, detail::CollectiveKind::barrier, std::any());
    }

private:
    void check_peer(int peer, bool allow_self, const char* who) const {
        if (peer < 0 || peer >= size())
            throw ValueError(std::string(who) + ": rank " + std::to_string(peer) +
                             " out of range for world size " + std::to_string(size()));
        if (!allow_self && peer == rank_)
            throw ValueError(std::string(who) + ": rank " + std::to_string(peer) +
                             " may not address itself");
    }

    template <typename T>
    T take(std::any message, int src) const {
        T* value = std::any_cast<T>(&message);
        if (value == nullptr)
            throw OrderingError("recv: payload type from rank " + std::to_string(src) +
                                " does not match the receiver's element type");
        return std::move(*value);
    }

    std::shared_ptr<detail::LoopbackWorld> world_;
    int rank_;
};

/// Runs `size` rank-workers concurrently on an in-process loopback world and
/// joins them. The first rank failure aborts the world (waking any blocked
/// peers) and is rethrown here after all workers finished.
void run_world(int size, const std::function<void(const Communicator&)>& body,
               WorldOptions options = WorldOptions::from_env());

}  // namespace dnd
