/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <shardprof/trace_model.hpp>

namespace shardprof {

inline constexpr char const* kKernelTable = "CUPTI_ACTIVITY_KIND_KERNEL";
inline constexpr char const* kMemcpyTable = "CUPTI_ACTIVITY_KIND_MEMCPY";
inline constexpr char const* kGpuTable = "TARGET_INFO_GPU";
inline constexpr char const* kStringTable = "StringIds";

/// Kernel names given as text are interned to ids at or above this base.
inline constexpr std::int64_t kInternedNameBase = std::int64_t{1} << 32;

struct TraceDatabaseRef {
    std::filesystem::path path;
    int profiling_rank_label{0};
};

struct TraceRecords {
    std::vector<KernelRecord> kernels;
    std::vector<MemcpyRecord> memcpys;
    std::vector<GpuInfo> gpus;
};

/**
 * @brief Read-only view of one Nsight/CUPTI SQLite export.
 *
 * Each worker opens its own reader. Rows are returned ordered by start
 * timestamp, then by row id, so every reader sees the same sequence.
 */
class TraceReader {
  public:
    explicit TraceReader(TraceDatabaseRef ref);
    ~TraceReader();
    TraceReader(TraceReader&&) noexcept;
    TraceReader& operator=(TraceReader&&) noexcept;

    [[nodiscard]] TraceDatabaseRef const& ref() const noexcept {
        return ref_;
    }

    /// [min kernel start, max kernel end + 1).
    [[nodiscard]] TimeWindow scan_kernel_time_range();

    /// Kernels whose start lies in `window`.
    [[nodiscard]] std::vector<KernelRecord> load_kernels(TimeWindow window);
    /// Memcpys whose start lies in `window`, or every memcpy when absent.
    [[nodiscard]] std::vector<MemcpyRecord> load_memcpys(std::optional<TimeWindow> window = {});
    [[nodiscard]] std::vector<GpuInfo> load_gpus();

    [[nodiscard]] TraceRecords load_records(TimeWindow window);

    /// id -> name for every kernel name id the trace uses.
    [[nodiscard]] std::map<std::int64_t, std::string> kernel_names();

  private:
    struct Impl;
    TraceDatabaseRef ref_;
    std::unique_ptr<Impl> impl_;
};

[[nodiscard]] TimeWindow scan_kernel_time_range(TraceDatabaseRef const& db);
[[nodiscard]] TraceRecords load_records(TraceDatabaseRef const& db, TimeWindow window);

/// (device_id, stream_id) packed into one ordered key.
struct JoinKey {
    std::int32_t device_id;
    std::int32_t stream_id;

    [[nodiscard]] static JoinKey of(KernelRecord const& k) noexcept {
        return {k.device_id, k.stream_id};
    }
    [[nodiscard]] static JoinKey of(MemcpyRecord const& m) noexcept {
        return {m.device_id, m.stream_id};
    }
    [[nodiscard]] std::uint64_t packed() const noexcept {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(device_id)) << 32)
               | static_cast<std::uint32_t>(stream_id);
    }
    auto operator<=>(JoinKey const&) const = default;
};

/**
 * @brief Build side of the left join: memcpys grouped by join key, GPUs by
 * device id. Group order follows input order.
 */
class JoinIndex {
  public:
    JoinIndex(std::span<MemcpyRecord const> memcpys, std::span<GpuInfo const> gpus);

    [[nodiscard]] std::span<MemcpyRecord const> matches(JoinKey key) const;
    [[nodiscard]] GpuInfo const* gpu(std::int32_t device_id) const;

    /// Rows the join will emit for these kernels: sum of max(1, multiplicity).
    [[nodiscard]] std::uint64_t output_rows(std::span<KernelRecord const> kernels) const;

    [[nodiscard]] std::size_t largest_group() const noexcept {
        return largest_group_;
    }

  private:
    std::unordered_map<std::uint64_t, std::vector<MemcpyRecord>> groups_;
    std::unordered_map<std::int32_t, GpuInfo> gpus_;
    std::size_t largest_group_{0};
};

/**
 * @brief Lazily yields the left join of kernels against a `JoinIndex`.
 *
 * Holds one cursor into the current kernel's memcpy group; nothing else is
 * buffered.
 */
class JoinStream {
  public:
    JoinStream(std::span<KernelRecord const> kernels, JoinIndex const& index)
        : kernels_{kernels}, index_{&index} {}

    [[nodiscard]] std::optional<JoinedSample> next();

  private:
    std::span<KernelRecord const> kernels_;
    JoinIndex const* index_;
    std::size_t kernel_{0};
    std::size_t match_{0};
};

/// Stream every joined sample into `sink`.
void left_join(
    std::span<KernelRecord const> kernels,
    JoinIndex const& index,
    std::function<void(JoinedSample const&)> const& sink
);

/// Materialized convenience form; prefer `JoinStream` for large inputs.
[[nodiscard]] std::vector<JoinedSample> left_join(
    std::span<KernelRecord const> kernels,
    std::span<MemcpyRecord const> memcpys,
    std::span<GpuInfo const> gpus
);

}  // namespace shardprof
