/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <shardprof/aggregation.hpp>
#include <shardprof/manifest.hpp>

namespace shardprof::report {

inline constexpr char const* kTimeseriesName = "stall_timeseries.csv";
inline constexpr char const* kParcoordsName = "parcoords.csv";
inline constexpr char const* kOverheadName = "overhead.csv";

/// Fixed CSV float formatting: 9 significant digits, shortest of %e/%f.
[[nodiscard]] std::string format_number(double value);

/// Interval statistics of one trace plus the origin its elapsed time is measured from.
struct TraceSeries {
    int trace_label{0};
    Timestamp t0;
    IntervalStatsMap const* stats{nullptr};
};

/**
 * @brief `trace_label,elapsed_s,stall_total_ns,stall_std_ns`, one row per
 * (trace, interval), grouped by trace in input order.
 */
void emit_stall_timeseries(std::vector<TraceSeries> const& traces, std::filesystem::path const& out);

/**
 * @brief Root-cause table for `top`, ordered by stall_std descending (ties to
 * the lower interval index).
 */
void emit_parallel_coordinates(
    IntervalStatsMap const& stats,
    std::vector<IntervalKey> const& top,
    Timestamp t0,
    std::filesystem::path const& out
);

enum class Phase { Generation, Aggregation };

[[nodiscard]] char const* phase_name(Phase phase) noexcept;

struct OverheadRecord {
    Phase phase{Phase::Generation};
    int world_size{1};
    std::vector<std::uint64_t> wall_time_ns;  ///< indexed by rank
    std::uint64_t max_wall_time_ns{0};

    bool operator==(OverheadRecord const&) const = default;
};

/**
 * @brief One record per (phase, world size) present in `manifests`, ordered
 * by phase then world size. A later manifest replaces an earlier one with
 * the same key.
 */
[[nodiscard]] std::vector<OverheadRecord> overhead_records(std::vector<Manifest> const& manifests);

/// `phase,world_size,max_wall_s,rank0_wall_s,...`, padded to the largest world size.
void emit_overhead_report(std::vector<Manifest> const& manifests, std::filesystem::path const& out);

enum class PlotKind { Timeseries, Parcoords, OverheadBars };

/// Self-contained SVG for a CSV written by the matching `emit_*` function.
/// Throws `MalformedCsv` when the header or a field does not parse.
void render_svg(std::filesystem::path const& csv, PlotKind kind, std::filesystem::path const& out);

/// As above, in memory.
[[nodiscard]] std::string render_svg_text(std::string const& csv, PlotKind kind);

}  // namespace shardprof::report
