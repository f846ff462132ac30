/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace shardprof {

using Bytes = std::vector<std::uint8_t>;

/// Identity of one worker inside a P-worker job.
struct WorkerCtx {
    int rank{0};
    int world_size{1};

    [[nodiscard]] bool is_root() const noexcept {
        return rank == 0;
    }
};

struct CommOptions {
    std::chrono::milliseconds timeout{std::chrono::seconds{300}};
    std::size_t max_payload_bytes{std::size_t{1} << 32};
};

inline constexpr char const* kEnvRank = "SHARDPROF_RANK";
inline constexpr char const* kEnvWorldSize = "SHARDPROF_WORLD_SIZE";
inline constexpr char const* kEnvRendezvous = "SHARDPROF_RENDEZVOUS";

/**
 * @brief Rank-addressed collective contract used by the pipeline stages.
 *
 * Every collective must be entered exactly once by every rank, in the same
 * order. With a single worker all collectives complete locally.
 */
class Communicator {
  public:
    Communicator(WorkerCtx ctx, CommOptions options);
    virtual ~Communicator() = default;

    Communicator(Communicator const&) = delete;
    Communicator& operator=(Communicator const&) = delete;

    [[nodiscard]] WorkerCtx const& ctx() const noexcept {
        return ctx_;
    }
    [[nodiscard]] CommOptions const& options() const noexcept {
        return options_;
    }

    /// Blocks until every rank has entered; throws `Timeout` past the deadline.
    void barrier();

    /**
     * @brief Collect one payload per rank at `root`, ordered by rank.
     *
     * @return the P payloads at `root`, `std::nullopt` elsewhere.
     */
    std::optional<std::vector<Bytes>> gather(Bytes payload, int root);

    std::optional<std::vector<Bytes>> gather_to_root(Bytes payload) {
        return gather(std::move(payload), 0);
    }

  protected:
    virtual void do_barrier(std::uint64_t seq) = 0;
    virtual std::optional<std::vector<Bytes>> do_gather(
        std::uint64_t seq, Bytes payload, int root
    ) = 0;

  private:
    WorkerCtx ctx_;
    CommOptions options_;
    std::uint64_t seq_{0};
};

/// Every rank receives every payload (P rooted gathers, one per root).
std::vector<Bytes> all_gather(Communicator& comm, Bytes const& payload);

/// Shared rendezvous for P communicators living in one process.
class InProcessGroup {
  public:
    explicit InProcessGroup(int world_size, CommOptions options = {});
    ~InProcessGroup();

    InProcessGroup(InProcessGroup const&) = delete;
    InProcessGroup& operator=(InProcessGroup const&) = delete;

    [[nodiscard]] std::unique_ptr<Communicator> communicator(int rank);
    [[nodiscard]] int world_size() const noexcept;

    /// Wake every blocked rank with an `Aborted` error.
    void abort(std::string const& reason);

    struct State;

  private:
    std::shared_ptr<State> state_;
};

/**
 * @brief Run `body` once per rank on `world_size` threads.
 *
 * The first failing rank aborts the group so that peers blocked in a
 * collective do not wait for the full timeout; the lowest-rank root cause is
 * rethrown.
 */
void run_in_process(
    int world_size, std::function<void(Communicator&)> const& body, CommOptions options = {}
);

/// Multi-process backend: ranks rendezvous through files in a shared directory.
class FileCommunicator final : public Communicator {
  public:
    FileCommunicator(WorkerCtx ctx, std::filesystem::path rendezvous_dir, CommOptions options = {});

    /// Build from `SHARDPROF_RANK`, `SHARDPROF_WORLD_SIZE`, `SHARDPROF_RENDEZVOUS`.
    static std::unique_ptr<FileCommunicator> from_environment(CommOptions options = {});

    /// Signal every rank sharing `rendezvous_dir` to give up.
    static void abort(std::filesystem::path const& rendezvous_dir);

  protected:
    void do_barrier(std::uint64_t seq) override;
    std::optional<std::vector<Bytes>> do_gather(
        std::uint64_t seq, Bytes payload, int root
    ) override;

  private:
    [[nodiscard]] std::filesystem::path slot(char tag, std::uint64_t seq, int rank) const;
    void publish(std::filesystem::path const& target, Bytes const& data) const;
    void await(std::vector<std::filesystem::path> const& paths) const;

    std::filesystem::path dir_;
};

}  // namespace shardprof
