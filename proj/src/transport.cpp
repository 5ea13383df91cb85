#include "dnd/transport.hpp"

#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace dnd {

WorldOptions WorldOptions::from_env() {
    WorldOptions options;
    if (const char* env = std::getenv("DND_TIMEOUT_SECS")) {
        char* end = nullptr;
        const double secs = std::strtod(env, &end);
        if (end != env && secs > 0.0)
            options.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(secs * 1000.0));
    }
    return options;
}

namespace detail {

const char* collective_name(CollectiveKind kind) {
    switch (kind) {
        case CollectiveKind::allreduce: return "allreduce";
        case CollectiveKind::allgather: return "allgather_varying";
        case CollectiveKind::alltoall: return "alltoall_varying";
        case CollectiveKind::barrier: return "barrier";
    }
    return "?";
}

struct LoopbackWorld::Slot {
    CollectiveKind kind{};
    int arrived = 0;
    int departed = 0;
    std::vector<char> seen;
    std::shared_ptr<std::vector<std::any>> contributions;
};

struct LoopbackWorld::State {
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<std::deque<std::any>> mailboxes;          // [src * size + dst]
    std::unordered_map<std::uint64_t, Slot> slots;        // keyed by call index
    std::vector<std::uint64_t> next_collective;           // per rank
    std::vector<char> done;
    bool aborted = false;
};

LoopbackWorld::LoopbackWorld(int size, WorldOptions options)
    : state_(std::make_unique<State>()), size_(size), timeout_(options.timeout),
      counters_(static_cast<std::size_t>(size)) {
    if (size < 1) throw ValueError("world size must be positive, got " + std::to_string(size));
    state_->mailboxes.resize(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
    state_->next_collective.resize(static_cast<std::size_t>(size), 0);
    state_->done.resize(static_cast<std::size_t>(size), 0);
}

void LoopbackWorld::p2p_send(int src, int dst, std::any payload) {
    std::lock_guard lock(state_->mutex);
    if (state_->aborted) throw TransportError("world aborted by a failing rank");
    state_->mailboxes[static_cast<std::size_t>(src) * size_ + dst].push_back(std::move(payload));
    state_->cv.notify_all();
}

// Deadlock deadlines use the system clock: libstdc++ waits on it through
// pthread_cond_timedwait, which sanitizer runtimes intercept (steady-clock
// waits go through pthread_cond_clockwait, which older ones do not).
std::any LoopbackWorld::p2p_recv(int dst, int src) {
    std::unique_lock lock(state_->mutex);
    const auto deadline = std::chrono::system_clock::now() + timeout_;
    auto& queue = state_->mailboxes[static_cast<std::size_t>(src) * size_ + dst];
    for (;;) {
        if (state_->aborted) throw TransportError("world aborted by a failing rank");
        if (!queue.empty()) {
            std::any message = std::move(queue.front());
            queue.pop_front();
            return message;
        }
        if (state_->done[static_cast<std::size_t>(src)]) {
            std::ostringstream msg;
            msg << "recv deadlock: rank " << dst << " waits for a message from rank " << src
                << ", which terminated without a matching send";
            throw TransportError(msg.str());
        }
        if (state_->cv.wait_until(lock, deadline) == std::cv_status::timeout) {
            std::ostringstream msg;
            msg << "recv timeout after " << timeout_.count() << " ms: rank " << dst
                << " waits for a message from rank " << src;
            throw TimeoutError(msg.str());
        }
    }
}

std::shared_ptr<const std::vector<std::any>> LoopbackWorld::collect(int rank, CollectiveKind kind,
                                                                    std::any contribution) {
    std::unique_lock lock(state_->mutex);
    if (state_->aborted) throw TransportError("world aborted by a failing rank");

    const std::uint64_t index = state_->next_collective[static_cast<std::size_t>(rank)]++;
    Slot& slot = state_->slots[index];
    if (slot.arrived == 0) {
        slot.kind = kind;
        slot.seen.assign(static_cast<std::size_t>(size_), 0);
        slot.contributions = std::make_shared<std::vector<std::any>>(static_cast<std::size_t>(size_));
    } else if (slot.kind != kind) {
        std::ostringstream msg;
        msg << "collective ordering violation at call #" << index << ": rank " << rank
            << " invoked " << collective_name(kind) << " while other ranks invoked "
            << collective_name(slot.kind);
        throw OrderingError(msg.str());
    }
    (*slot.contributions)[static_cast<std::size_t>(rank)] = std::move(contribution);
    slot.seen[static_cast<std::size_t>(rank)] = 1;
    slot.arrived++;
    state_->cv.notify_all();

    const auto deadline = std::chrono::system_clock::now() + timeout_;
    while (slot.arrived < size_) {
        if (state_->aborted) throw TransportError("world aborted by a failing rank");
        for (int r = 0; r < size_; ++r) {
            if (state_->done[static_cast<std::size_t>(r)] && !slot.seen[static_cast<std::size_t>(r)]) {
                std::ostringstream msg;
                msg << "collective ordering violation: rank " << r << " terminated while "
                    << collective_name(slot.kind) << " call #" << index
                    << " awaited its participation";
                throw OrderingError(msg.str());
            }
        }
        if (state_->cv.wait_until(lock, deadline) == std::cv_status::timeout) {
            std::ostringstream msg;
            msg << collective_name(slot.kind) << " call #" << index << " timed out after "
                << timeout_.count() << " ms on rank " << rank << "; missing ranks:";
            for (int r = 0; r < size_; ++r)
                if (!slot.seen[static_cast<std::size_t>(r)]) msg << ' ' << r;
            throw TimeoutError(msg.str());
        }
    }

    auto result = std::shared_ptr<const std::vector<std::any>>(slot.contributions);
    slot.departed++;
    if (slot.departed == size_) state_->slots.erase(index);
    state_->cv.notify_all();
    return result;
}

void LoopbackWorld::mark_done(int rank) {
    std::lock_guard lock(state_->mutex);
    state_->done[static_cast<std::size_t>(rank)] = 1;
    state_->cv.notify_all();
}

void LoopbackWorld::abort() noexcept {
    std::lock_guard lock(state_->mutex);
    state_->aborted = true;
    state_->cv.notify_all();
}

}  // namespace detail

void run_world(int size, const std::function<void(const Communicator&)>& body,
               WorldOptions options) {
    if (size < 1) throw ValueError("run_world: size must be positive, got " + std::to_string(size));

    auto world = std::make_shared<detail::LoopbackWorld>(size, options);
    std::mutex error_mutex;
    std::exception_ptr first_error;

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(size));
    for (int r = 0; r < size; ++r) {
        workers.emplace_back([&, r] {
            const Communicator comm(world, r);
            try {
                body(comm);
            } catch (...) {
                {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
                world->abort();
            }
            world->mark_done(r);
        });
    }
    for (auto& worker : workers) worker.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dnd
