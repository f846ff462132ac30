/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/report.hpp>

namespace shardprof::report {

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";  // also folds -0
    }
    return fmt::format("{:.9g}", value);
}

namespace {

double seconds(Nanoseconds ns) {
    return static_cast<double>(ns) / 1e9;
}

}  // namespace

void emit_stall_timeseries(std::vector<TraceSeries> const& traces, std::filesystem::path const& out) {
    SHARDPROF_EXPECTS(!traces.empty(), ErrorKind::EmptyInput, "no traces to report");
    std::string csv = "trace_label,elapsed_s,stall_total_ns,stall_std_ns\n";
    for (auto const& t : traces) {
        SHARDPROF_EXPECTS(t.stats != nullptr, ErrorKind::InvalidArgument, "trace without statistics");
        for (auto const& [index, s] : *t.stats) {
            csv += fmt::format(
                "{},{},{},{}\n",
                t.trace_label,
                format_number(seconds(s.key.start.since(t.t0))),
                s.stall_total,
                format_number(s.stall_std)
            );
        }
    }
    write_file_atomic(out, csv);
}

void emit_parallel_coordinates(
    IntervalStatsMap const& stats,
    std::vector<IntervalKey> const& top,
    Timestamp t0,
    std::filesystem::path const& out
) {
    SHARDPROF_EXPECTS(!top.empty(), ErrorKind::EmptyInput, "no intervals selected");
    std::vector<IntervalStats const*> rows;
    for (auto const& k : top) {
        auto const it = stats.find(k.index);
        SHARDPROF_EXPECTS(
            it != stats.end(), ErrorKind::InvalidArgument, fmt::format("unknown interval {}", k.index)
        );
        rows.push_back(&it->second);
    }
    std::stable_sort(rows.begin(), rows.end(), [](auto const* a, auto const* b) {
        if (a->stall_std != b->stall_std) {
            return a->stall_std > b->stall_std;
        }
        return a->key.index < b->key.index;
    });
    using Tag = CopyKind::Tag;
    std::string csv =
        "interval_start_s,stall_total_ns,kernel_count,htod_count,dtoh_count,dtod_count,"
        "htod_bytes,dtoh_bytes,dtod_bytes,stall_std_ns\n";
    for (auto const* s : rows) {
        csv += fmt::format(
            "{},{},{},{},{},{},{},{},{},{}\n",
            format_number(seconds(s->key.start.since(t0))),
            s->stall_total,
            s->kernel_count,
            s->count_of(Tag::HtoD),
            s->count_of(Tag::DtoH),
            s->count_of(Tag::DtoD),
            s->bytes_of(Tag::HtoD),
            s->bytes_of(Tag::DtoH),
            s->bytes_of(Tag::DtoD),
            format_number(s->stall_std)
        );
    }
    write_file_atomic(out, csv);
}

char const* phase_name(Phase phase) noexcept {
    return phase == Phase::Generation ? "generation" : "aggregation";
}

std::vector<OverheadRecord> overhead_records(std::vector<Manifest> const& manifests) {
    std::map<std::pair<Phase, int>, OverheadRecord> by_key;
    auto record = [&](Phase phase, int world_size, Manifest const& m) {
        OverheadRecord r{phase, world_size, {}, 0};
        for (int rank = 0; rank < world_size; ++rank) {
            auto const it = m.timings.find(rank);
            auto const& v = phase == Phase::Generation
                                ? (it == m.timings.end() ? std::nullopt : it->second.generation_ns)
                                : (it == m.timings.end() ? std::nullopt : it->second.aggregation_ns);
            SHARDPROF_EXPECTS(
                v.has_value(),
                ErrorKind::InvalidArgument,
                fmt::format("manifest lacks {} timing for rank {}", phase_name(phase), rank)
            );
            r.wall_time_ns.push_back(*v);
            r.max_wall_time_ns = std::max(r.max_wall_time_ns, *v);
        }
        by_key[{phase, world_size}] = std::move(r);
    };
    for (auto const& m : manifests) {
        record(Phase::Generation, m.config.num_workers, m);
        if (m.aggregation_workers) {
            record(Phase::Aggregation, *m.aggregation_workers, m);
        }
    }
    SHARDPROF_EXPECTS(!by_key.empty(), ErrorKind::EmptyInput, "no manifests with timings");
    std::vector<OverheadRecord> out;
    for (auto& [key, r] : by_key) {
        out.push_back(std::move(r));
    }
    return out;
}

void emit_overhead_report(std::vector<Manifest> const& manifests, std::filesystem::path const& out) {
    auto const records = overhead_records(manifests);
    int widest = 0;
    for (auto const& r : records) {
        widest = std::max(widest, r.world_size);
    }
    std::string csv = "phase,world_size,max_wall_s";
    for (int rank = 0; rank < widest; ++rank) {
        csv += fmt::format(",rank{}_wall_s", rank);
    }
    csv += '\n';
    for (auto const& r : records) {
        csv += fmt::format(
            "{},{},{}", phase_name(r.phase), r.world_size, format_number(seconds(r.max_wall_time_ns))
        );
        for (int rank = 0; rank < widest; ++rank) {
            csv += ',';
            if (rank < r.world_size) {
                csv += format_number(seconds(r.wall_time_ns[static_cast<std::size_t>(rank)]));
            }
        }
        csv += '\n';
    }
    write_file_atomic(out, csv);
}

void render_svg(std::filesystem::path const& csv, PlotKind kind, std::filesystem::path const& out) {
    write_file_atomic(out, render_svg_text(read_text_file(csv), kind));
}

}  // namespace shardprof::report
