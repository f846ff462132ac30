/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include <shardprof/comm.hpp>
#include <shardprof/error.hpp>

namespace shardprof {

Communicator::Communicator(WorkerCtx ctx, CommOptions options)
    : ctx_{ctx}, options_{options} {
    SHARDPROF_EXPECTS(
        ctx.world_size >= 1 && ctx.rank >= 0 && ctx.rank < ctx.world_size,
        ErrorKind::InvalidArgument,
        fmt::format("invalid worker identity rank={} world_size={}", ctx.rank, ctx.world_size)
    );
}

void Communicator::barrier() {
    auto const seq = seq_++;
    if (ctx_.world_size == 1) {
        return;
    }
    do_barrier(seq);
}

std::optional<std::vector<Bytes>> Communicator::gather(Bytes payload, int root) {
    SHARDPROF_EXPECTS(
        root >= 0 && root < ctx_.world_size,
        ErrorKind::InvalidArgument,
        fmt::format("gather root {} outside [0, {})", root, ctx_.world_size)
    );
    SHARDPROF_EXPECTS(
        payload.size() <= options_.max_payload_bytes,
        ErrorKind::PayloadTooLarge,
        fmt::format(
            "payload of {} bytes exceeds limit {}", payload.size(), options_.max_payload_bytes
        )
    );
    auto const seq = seq_++;
    if (ctx_.world_size == 1) {
        std::vector<Bytes> out;
        out.push_back(std::move(payload));
        return out;
    }
    return do_gather(seq, std::move(payload), root);
}

std::vector<Bytes> all_gather(Communicator& comm, Bytes const& payload) {
    std::vector<Bytes> result;
    for (int root = 0; root < comm.ctx().world_size; ++root) {
        auto got = comm.gather(payload, root);
        if (got) {
            result = std::move(*got);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// In-process backend

struct InProcessGroup::State {
    struct Slot {
        int arrived{0};
        int departed{0};
        std::vector<std::optional<Bytes>> payloads;
    };

    State(int p, CommOptions o) : world_size{p}, options{o} {}

    int world_size;
    CommOptions options;
    std::mutex mutex;
    std::condition_variable cv;
    std::map<std::uint64_t, Slot> slots;
    bool aborted{false};
    std::string abort_reason;

    Slot& slot(std::uint64_t seq) {
        auto [it, inserted] = slots.try_emplace(seq);
        if (inserted) {
            it->second.payloads.resize(static_cast<std::size_t>(world_size));
        }
        return it->second;
    }

    template <typename Pred>
    void wait(std::unique_lock<std::mutex>& lock, Pred done, int rank, char const* what) {
        auto const deadline = std::chrono::steady_clock::now() + options.timeout;
        bool const ok = cv.wait_until(lock, deadline, [&] { return aborted || done(); });
        if (aborted) {
            fail(ErrorKind::Aborted, fmt::format("{} at rank {}: {}", what, rank, abort_reason));
        }
        if (!ok) {
            fail(
                ErrorKind::Timeout,
                fmt::format(
                    "{} at rank {} timed out after {} ms", what, rank, options.timeout.count()
                )
            );
        }
    }
};

namespace {

class InProcessCommunicator final : public Communicator {
  public:
    InProcessCommunicator(WorkerCtx ctx, std::shared_ptr<InProcessGroup::State> state)
        : Communicator(ctx, state->options), state_{std::move(state)} {}

  protected:
    void do_barrier(std::uint64_t seq) override {
        auto& st = *state_;
        std::unique_lock lock{st.mutex};
        auto& s = st.slot(seq);
        ++s.arrived;
        st.cv.notify_all();
        st.wait(lock, [&] { return s.arrived == st.world_size; }, ctx().rank, "barrier");
        if (++s.departed == st.world_size) {
            st.slots.erase(seq);
        }
    }

    std::optional<std::vector<Bytes>> do_gather(
        std::uint64_t seq, Bytes payload, int root
    ) override {
        auto& st = *state_;
        std::unique_lock lock{st.mutex};
        auto& s = st.slot(seq);
        s.payloads[static_cast<std::size_t>(ctx().rank)] = std::move(payload);
        ++s.arrived;
        if (ctx().rank != root) {
            st.cv.notify_all();
            return std::nullopt;
        }
        st.wait(lock, [&] { return s.arrived == st.world_size; }, ctx().rank, "gather");
        std::vector<Bytes> out;
        out.reserve(s.payloads.size());
        for (auto& p : s.payloads) {
            out.push_back(std::move(*p));
        }
        st.slots.erase(seq);
        return out;
    }

  private:
    std::shared_ptr<InProcessGroup::State> state_;
};

}  // namespace

InProcessGroup::InProcessGroup(int world_size, CommOptions options) {
    SHARDPROF_EXPECTS(
        world_size >= 1, ErrorKind::InvalidArgument, "world_size must be >= 1"
    );
    state_ = std::make_shared<State>(world_size, options);
}

InProcessGroup::~InProcessGroup() = default;

std::unique_ptr<Communicator> InProcessGroup::communicator(int rank) {
    return std::make_unique<InProcessCommunicator>(
        WorkerCtx{rank, state_->world_size}, state_
    );
}

int InProcessGroup::world_size() const noexcept {
    return state_->world_size;
}

void InProcessGroup::abort(std::string const& reason) {
    std::lock_guard lock{state_->mutex};
    if (!state_->aborted) {
        state_->aborted = true;
        state_->abort_reason = reason;
    }
    state_->cv.notify_all();
}

void run_in_process(
    int world_size, std::function<void(Communicator&)> const& body, CommOptions options
) {
    InProcessGroup group{world_size, options};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(world_size));
    std::vector<std::unique_ptr<Communicator>> comms;
    for (int r = 0; r < world_size; ++r) {
        comms.push_back(group.communicator(r));
    }
    auto work = [&](int r) {
        try {
            body(*comms[static_cast<std::size_t>(r)]);
        } catch (std::exception const& e) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
            group.abort(fmt::format("rank {} failed: {}", r, e.what()));
        } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
            group.abort(fmt::format("rank {} failed", r));
        }
    };
    if (world_size == 1) {
        work(0);
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(static_cast<std::size_t>(world_size));
        for (int r = 0; r < world_size; ++r) {
            threads.emplace_back(work, r);
        }
    }
    // Prefer a root cause over the Aborted errors it triggered in peers.
    std::exception_ptr first;
    for (auto const& e : errors) {
        if (!e) {
            continue;
        }
        try {
            std::rethrow_exception(e);
        } catch (Error const& err) {
            if (err.kind() != ErrorKind::Aborted) {
                std::rethrow_exception(e);
            }
        } catch (...) {
            std::rethrow_exception(e);
        }
        if (!first) {
            first = e;
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

// ---------------------------------------------------------------------------
// File rendezvous backend

namespace {

constexpr char const* kAbortFile = "ABORT";

Bytes read_file(std::filesystem::path const& path) {
    std::ifstream in{path, std::ios::binary};
    SHARDPROF_EXPECTS(in, ErrorKind::IoError, fmt::format("cannot open {}", path.string()));
    in.seekg(0, std::ios::end);
    auto const size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    Bytes data(size);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
    SHARDPROF_EXPECTS(in, ErrorKind::IoError, fmt::format("short read on {}", path.string()));
    return data;
}

int env_int(char const* name) {
    char const* v = std::getenv(name);
    SHARDPROF_EXPECTS(
        v != nullptr, ErrorKind::InvalidArgument, fmt::format("{} is not set", name)
    );
    char* end = nullptr;
    long const x = std::strtol(v, &end, 10);
    SHARDPROF_EXPECTS(
        end != v && *end == '\0',
        ErrorKind::InvalidArgument,
        fmt::format("{}='{}' is not an integer", name, v)
    );
    return static_cast<int>(x);
}

}  // namespace

FileCommunicator::FileCommunicator(
    WorkerCtx ctx, std::filesystem::path rendezvous_dir, CommOptions options
)
    : Communicator(ctx, options), dir_{std::move(rendezvous_dir)} {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    SHARDPROF_EXPECTS(
        std::filesystem::is_directory(dir_),
        ErrorKind::IoError,
        fmt::format("rendezvous directory {} unavailable", dir_.string())
    );
}

std::unique_ptr<FileCommunicator> FileCommunicator::from_environment(CommOptions options) {
    char const* dir = std::getenv(kEnvRendezvous);
    SHARDPROF_EXPECTS(
        dir != nullptr && *dir != '\0',
        ErrorKind::InvalidArgument,
        fmt::format("{} is not set", kEnvRendezvous)
    );
    return std::make_unique<FileCommunicator>(
        WorkerCtx{env_int(kEnvRank), env_int(kEnvWorldSize)}, dir, options
    );
}

void FileCommunicator::abort(std::filesystem::path const& rendezvous_dir) {
    std::ofstream{rendezvous_dir / kAbortFile} << "abort\n";
}

std::filesystem::path FileCommunicator::slot(char tag, std::uint64_t seq, int rank) const {
    return dir_ / fmt::format("{}{:010d}_r{:05d}", tag, seq, rank);
}

void FileCommunicator::publish(std::filesystem::path const& target, Bytes const& data) const {
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        SHARDPROF_EXPECTS(
            out, ErrorKind::IoError, fmt::format("cannot write {}", tmp.string())
        );
        out.write(
            reinterpret_cast<char const*>(data.data()), static_cast<std::streamsize>(data.size())
        );
        SHARDPROF_EXPECTS(
            out, ErrorKind::IoError, fmt::format("short write on {}", tmp.string())
        );
    }
    std::filesystem::rename(tmp, target);
}

void FileCommunicator::await(std::vector<std::filesystem::path> const& paths) const {
    auto const deadline = std::chrono::steady_clock::now() + options().timeout;
    auto pause = std::chrono::microseconds{20};
    std::size_t ready = 0;
    for (;;) {
        while (ready < paths.size() && std::filesystem::exists(paths[ready])) {
            ++ready;
        }
        if (ready == paths.size()) {
            return;
        }
        if (std::filesystem::exists(dir_ / kAbortFile)) {
            fail(ErrorKind::Aborted, fmt::format("rank {}: job aborted", ctx().rank));
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            fail(
                ErrorKind::Timeout,
                fmt::format(
                    "rank {} waited {} ms for {}",
                    ctx().rank,
                    options().timeout.count(),
                    paths[ready].filename().string()
                )
            );
        }
        std::this_thread::sleep_for(pause);
        pause = std::min(pause * 2, std::chrono::microseconds{5000});
    }
}

void FileCommunicator::do_barrier(std::uint64_t seq) {
    publish(slot('b', seq, ctx().rank), {});
    std::vector<std::filesystem::path> all;
    for (int r = 0; r < ctx().world_size; ++r) {
        all.push_back(slot('b', seq, r));
    }
    await(all);
}

std::optional<std::vector<Bytes>> FileCommunicator::do_gather(
    std::uint64_t seq, Bytes payload, int root
) {
    if (ctx().rank != root) {
        publish(slot('g', seq, ctx().rank), payload);
        return std::nullopt;
    }
    std::vector<std::filesystem::path> peers;
    for (int r = 0; r < ctx().world_size; ++r) {
        if (r != root) {
            peers.push_back(slot('g', seq, r));
        }
    }
    await(peers);
    std::vector<Bytes> out;
    out.reserve(static_cast<std::size_t>(ctx().world_size));
    for (int r = 0; r < ctx().world_size; ++r) {
        if (r == root) {
            out.push_back(std::move(payload));
            continue;
        }
        auto const p = slot('g', seq, r);
        out.push_back(read_file(p));
        std::filesystem::remove(p);
    }
    return out;
}

}  // namespace shardprof
