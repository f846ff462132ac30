/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include <shardprof/comm.hpp>
#include <shardprof/manifest.hpp>
#include <shardprof/partitioner.hpp>
#include <shardprof/trace_model.hpp>

namespace shardprof {

inline constexpr char const* kIntervalStatsName = "interval_stats.parquet";
inline constexpr char const* kAnomaliesName = "anomalies.json";

struct IntervalKey {
    std::uint64_t index{0};
    Timestamp start;

    bool operator==(IntervalKey const&) const = default;
};

/**
 * @brief Statistics of one fixed-duration interval.
 *
 * Stall samples are the per-(joined memcpy, interval) overlaps; counts and
 * bytes attribute each joined memcpy to the interval holding its start.
 * `kernel_count` counts distinct kernel launches starting in the interval.
 */
struct IntervalStats {
    IntervalKey key;
    Nanoseconds stall_min{0};
    Nanoseconds stall_max{0};
    double stall_std{0.0};
    Nanoseconds stall_total{0};
    std::uint64_t kernel_count{0};
    std::map<CopyKind, std::uint64_t> memcpy_count_by_kind;
    std::map<CopyKind, std::uint64_t> bytes_by_kind;
    std::uint64_t sample_count{0};

    [[nodiscard]] bool empty() const noexcept {
        return sample_count == 0 && kernel_count == 0 && memcpy_count_by_kind.empty();
    }
    [[nodiscard]] std::uint64_t count_of(CopyKind::Tag tag) const;
    [[nodiscard]] std::uint64_t bytes_of(CopyKind::Tag tag) const;

    bool operator==(IntervalStats const&) const = default;
};

using IntervalStatsMap = std::map<std::uint64_t, IntervalStats>;

struct ShardAnomaly {
    std::int64_t shard_index{0};
    double metric{0.0};
    double exceedance{0.0};

    bool operator==(ShardAnomaly const&) const = default;
};

struct AnomalyReport {
    double q1{0.0};
    double q3{0.0};
    double iqr{0.0};
    double upper_fence{0.0};
    /// Ordered by shard index.
    std::vector<ShardAnomaly> flagged_shards;
    /// At most top_k, by exceedance descending, ties to the lower shard index.
    std::vector<ShardAnomaly> top_shards;
    std::vector<IntervalKey> top_intervals;

    bool operator==(AnomalyReport const&) const = default;
};

/// floor((t - t0) / interval_ns); `OutOfRange` when t < t0.
[[nodiscard]] IntervalKey interval_of(Timestamp t, Timestamp t0, Nanoseconds interval_ns);

/// Overlap of [memcpy start, memcpy end) with `interval`.
[[nodiscard]] Nanoseconds stall_duration(MemcpyRecord const& memcpy, TimeWindow interval);
/// As above; `InvalidArgument` when the sample carries no memcpy.
[[nodiscard]] Nanoseconds stall_duration(JoinedSample const& sample, TimeWindow interval);

/**
 * @brief Local binning of joined samples into intervals.
 *
 * The part of a transfer before t0 is dropped; its count and bytes land in
 * interval 0. Partials merge in
 * call order, so merging rank partials in rank order reproduces the
 * single-worker sample sequence exactly.
 */
class IntervalAccumulator {
  public:
    IntervalAccumulator(Timestamp t0, Nanoseconds interval_ns);

    /// `first_of_kernel` marks the first joined row of a kernel launch.
    void add(JoinedSample const& sample, bool first_of_kernel);
    /// Bin every row of a shard file, detecting kernel launches as runs.
    void add_shard_file(std::filesystem::path const& path);

    /// Serialized partials of the intervals owned by `owner` (index mod P).
    [[nodiscard]] Bytes encode_for_owner(int owner, int world_size) const;
    void merge(Bytes const& encoded);

    [[nodiscard]] IntervalStatsMap finalize() const;

  private:
    struct Partial {
        std::uint64_t kernel_count{0};
        std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> kinds;
        std::vector<std::uint64_t> samples;
    };

    Partial& at(std::uint64_t index);

    Timestamp t0_;
    Nanoseconds interval_ns_;
    std::map<std::uint64_t, Partial> partials_;
};

/// Interval index -> owning rank under round-robin ownership.
[[nodiscard]] constexpr int interval_owner(std::uint64_t index, int world_size) noexcept {
    return static_cast<int>(index % static_cast<std::uint64_t>(world_size));
}

/**
 * @brief Collaborative interval statistics over a generation run.
 *
 * Each rank bins its block of shard files; partials travel to round-robin
 * owners, owners finalize min/max/std, and rank 0 gathers the complete map
 * (every interval from 0 to the last populated one, empty ones zeroed).
 *
 * @return the complete map at rank 0, `std::nullopt` elsewhere.
 */
[[nodiscard]] std::optional<IntervalStatsMap> compute_interval_stats(
    Manifest const& manifest,
    std::filesystem::path const& run_dir,
    AggregationConfig const& cfg,
    Communicator& comm
);

/// Population std of stall_total over the non-empty intervals starting in
/// each shard window (0 with fewer than two).
[[nodiscard]] std::map<std::int64_t, double> shard_variability(
    IntervalStatsMap const& stats,
    std::vector<ShardSpec> const& shards,
    Timestamp t0,
    AggregationConfig const& cfg
);

/// Upper-fence IQR rule over shard metrics; `top_intervals` is left empty.
[[nodiscard]] AnomalyReport iqr_anomalies(
    std::map<std::int64_t, double> const& metrics, AggregationConfig const& cfg
);

/// First ceil(fraction * non-empty) intervals by stall_std descending.
[[nodiscard]] std::vector<IntervalKey> top_variability_intervals(
    IntervalStatsMap const& stats, AggregationConfig const& cfg
);

/// Flag values the caller supplied explicitly; unset fields are not checked.
struct AggregationExpectations {
    std::optional<std::int64_t> num_shards;
    std::optional<TimeWindow> range;
};

struct AggregationResult {
    IntervalStatsMap stats;
    std::map<std::int64_t, double> shard_metrics;
    AnomalyReport report;
};

/**
 * @brief Stage two over the run directory written by `run_generation`.
 *
 * Rank 0 writes `interval_stats.parquet` and `anomalies.json` and records
 * per-rank aggregation timings in the manifest. Throws `ManifestMismatch`
 * when the manifest's config hash disagrees with `expect`.
 */
std::optional<AggregationResult> run_aggregation(
    std::filesystem::path const& run_dir,
    AggregationConfig const& cfg,
    Communicator& comm,
    AggregationExpectations const& expect = {}
);

void write_interval_stats(std::filesystem::path const& path, IntervalStatsMap const& stats);
/// Inverse of `write_interval_stats`; unknown copy kinds come back as Other(0).
[[nodiscard]] IntervalStatsMap read_interval_stats(std::filesystem::path const& path);

[[nodiscard]] nlohmann::ordered_json anomalies_to_json(
    AnomalyReport const& report,
    std::map<std::int64_t, double> const& shard_metrics,
    IntervalStatsMap const& stats,
    AggregationConfig const& cfg
);

}  // namespace shardprof
