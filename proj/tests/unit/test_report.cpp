/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include <gtest/gtest.h>

#include <shardprof/aggregation.hpp>
#include <shardprof/generation.hpp>
#include <shardprof/report.hpp>
#include <shardprof/synth.hpp>

#include "../support/expect_error.hpp"
#include "../support/oracles.hpp"

using namespace shardprof;
using namespace shardprof::report;
namespace oracle = shardprof::testing;
using oracle::TempDir;

namespace {

std::vector<std::vector<std::string>> parse_csv(std::string const& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in{text};
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls{line};
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        if (!line.empty() && line.back() == ',') {
            fields.emplace_back();
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

IntervalStats interval(std::uint64_t index, std::uint64_t t0, std::uint64_t total, double std_ns) {
    IntervalStats s;
    s.key = IntervalKey{index, Timestamp{t0 + index * 1'000'000'000}};
    s.stall_total = total;
    s.stall_std = std_ns;
    s.sample_count = total > 0 ? 2 : 0;
    return s;
}

std::size_t count_of(std::string const& text, std::string const& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

/// Tag balance and quoted attributes; enough to catch broken markup.
bool well_formed_xml(std::string const& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool root_seen = false;
    while ((i = text.find('<', i)) != std::string::npos) {
        auto const close = text.find('>', i);
        if (close == std::string::npos) {
            return false;
        }
        auto const tag = text.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.starts_with("?") || tag.starts_with("!--")) {
            continue;
        }
        if (count_of(tag, "\"") % 2 != 0) {
            return false;
        }
        if (tag.starts_with("/")) {
            if (stack.empty() || stack.back() != tag.substr(1)) {
                return false;
            }
            stack.pop_back();
            continue;
        }
        if (stack.empty() && root_seen) {
            return false;
        }
        root_seen = true;
        if (tag.ends_with("/")) {
            continue;
        }
        stack.push_back(tag.substr(0, tag.find_first_of(" \n\t")));
    }
    // Text outside tags must not contain raw ampersands.
    return root_seen && stack.empty() && std::regex_search(text, std::regex{"&(?!amp;|lt;|gt;|quot;|apos;)"}) == false;
}

std::vector<std::vector<double>> polylines(std::string const& svg) {
    std::vector<std::vector<double>> out;
    std::regex const re{"<polyline points=\"([^\"]*)\""};
    for (std::sregex_iterator it{svg.begin(), svg.end(), re}, end; it != end; ++it) {
        std::vector<double> xs;
        std::istringstream in{(*it)[1].str()};
        std::string pt;
        while (in >> pt) {
            xs.push_back(std::stod(pt.substr(0, pt.find(','))));
        }
        out.push_back(std::move(xs));
    }
    return out;
}

Manifest timed_manifest(int generation_workers, std::optional<int> aggregation_workers, std::uint64_t base) {
    Manifest m;
    m.config = PartitionConfig{8, generation_workers, Timestamp{0}, Timestamp{100}};
    for (int r = 0; r < generation_workers; ++r) {
        m.timings[r].generation_ns = base + static_cast<std::uint64_t>(r) * 1000;
    }
    if (aggregation_workers) {
        m.aggregation_workers = aggregation_workers;
        for (int r = 0; r < *aggregation_workers; ++r) {
            m.timings[r].aggregation_ns = base / 2 + static_cast<std::uint64_t>(r);
        }
    }
    return m;
}

}  // namespace

TEST(FormatNumber, FixedNineSignificantDigits) {
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(2.5), "2.5");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
    EXPECT_EQ(format_number(123456789012.0), "1.23456789e+11");
    EXPECT_EQ(format_number(-4.0), "-4");
}

TEST(Timeseries, ThreeIntervalsElapsedSeconds) {
    TempDir dir;
    IntervalStatsMap stats;
    for (std::uint64_t i = 0; i < 3; ++i) {
        stats[i] = interval(i, 500, 10 * (i + 1), 0.5);
    }
    emit_stall_timeseries({{0, Timestamp{500}, &stats}}, dir / "t.csv");
    auto const text = read_text_file(dir / "t.csv");
    EXPECT_EQ(text.find('\r'), std::string::npos);
    auto const rows = parse_csv(text);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"trace_label", "elapsed_s", "stall_total_ns", "stall_std_ns"}));
    EXPECT_EQ(rows[1], (std::vector<std::string>{"0", "0", "10", "0.5"}));
    EXPECT_EQ(rows[2][1], "1");
    EXPECT_EQ(rows[3][1], "2");
    EXPECT_EQ(rows[3][2], "30");
}

TEST(Timeseries, TracesGroupedWithOwnOrigin) {
    TempDir dir;
    std::vector<IntervalStatsMap> maps(4);
    std::vector<TraceSeries> traces;
    for (int t = 0; t < 4; ++t) {
        auto const t0 = 1'000'000u * static_cast<std::uint64_t>(t + 1);
        for (std::uint64_t i = 0; i < 2; ++i) {
            maps[static_cast<std::size_t>(t)][i] = interval(i, t0, 1, 0);
        }
        traces.push_back({t, Timestamp{t0}, &maps[static_cast<std::size_t>(t)]});
    }
    emit_stall_timeseries(traces, dir / "t.csv");
    auto const rows = parse_csv(read_text_file(dir / "t.csv"));
    ASSERT_EQ(rows.size(), 9u);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        EXPECT_EQ(rows[r][0], std::to_string((r - 1) / 2));
        EXPECT_EQ(rows[r][1], (r - 1) % 2 == 0 ? "0" : "1");
    }
}

TEST(Timeseries, InjectedBurstPeaksAtFiveSeconds) {
    TempDir dir;
    synth::SynthSpec spec;
    spec.duration_s = 10;
    spec.stall_bursts = {{5.0, 1.0, 10.0}};
    auto const [db, truth] = synth::generate_db(spec, dir / "db");
    PartitionConfig const cfg{4, 1, truth.kernel_range.begin, truth.kernel_range.end};
    std::optional<AggregationResult> result;
    run_in_process(1, [&](Communicator& c) {
        (void)run_generation(db, cfg, c, dir / "run");
        result = run_aggregation(dir / "run", AggregationConfig{}, c);
    });
    ASSERT_TRUE(result);
    emit_stall_timeseries({{0, truth.kernel_range.begin, &result->stats}}, dir / "t.csv");
    auto const rows = parse_csv(read_text_file(dir / "t.csv"));
    std::size_t best = 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (std::stod(rows[r][2]) > std::stod(rows[best][2])) {
            best = r;
        }
    }
    EXPECT_EQ(rows[best][1], "5");
}

TEST(Timeseries, Deterministic) {
    TempDir dir;
    IntervalStatsMap stats;
    for (std::uint64_t i = 0; i < 50; ++i) {
        stats[i] = interval(i, 0, i * 7919 % 1000, static_cast<double>(i) / 7.0);
    }
    emit_stall_timeseries({{3, Timestamp{0}, &stats}}, dir / "a.csv");
    emit_stall_timeseries({{3, Timestamp{0}, &stats}}, dir / "b.csv");
    EXPECT_EQ(read_text_file(dir / "a.csv"), read_text_file(dir / "b.csv"));
}

TEST(Parcoords, RowsFollowTopOrder) {
    TempDir dir;
    IntervalStatsMap stats;
    double const stds[] = {3, 9, 1, 9, 4, 2, 8, 0};
    for (std::uint64_t i = 0; i < 8; ++i) {
        stats[i] = interval(i, 100, 5, stds[i]);
        stats[i].kernel_count = i;
        stats[i].memcpy_count_by_kind[CopyKind::htod()] = 2;
        stats[i].bytes_by_kind[CopyKind::htod()] = 64;
    }
    AggregationConfig cfg;
    cfg.variability_fraction = Fraction{5, 8};
    auto const top = top_variability_intervals(stats, cfg);
    ASSERT_EQ(top.size(), 5u);
    emit_parallel_coordinates(stats, top, Timestamp{100}, dir / "p.csv");
    auto const rows = parse_csv(read_text_file(dir / "p.csv"));
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(
        rows[0],
        (std::vector<std::string>{
            "interval_start_s",
            "stall_total_ns",
            "kernel_count",
            "htod_count",
            "dtoh_count",
            "dtod_count",
            "htod_bytes",
            "dtoh_bytes",
            "dtod_bytes",
            "stall_std_ns"
        })
    );
    std::vector<std::string> starts;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        starts.push_back(rows[r][0]);
        EXPECT_EQ(rows[r][3], "2");
        EXPECT_EQ(rows[r][4], "0");
        EXPECT_EQ(rows[r][5], "0");
        EXPECT_EQ(rows[r][6], "64");
        EXPECT_EQ(rows[r][8], "0");
    }
    EXPECT_EQ(starts, (std::vector<std::string>{"1", "3", "6", "4", "0"}));
}

TEST(Overhead, OneRowPerPhaseAndSize) {
    TempDir dir;
    std::vector<Manifest> ms{
        timed_manifest(1, 1, 8'000'000'000), timed_manifest(2, 2, 4'000'000'000), timed_manifest(4, 4, 2'000'000'000)
    };
    auto const records = overhead_records(ms);
    ASSERT_EQ(records.size(), 6u);
    for (auto const& r : records) {
        EXPECT_EQ(r.wall_time_ns.size(), static_cast<std::size_t>(r.world_size));
        EXPECT_EQ(r.max_wall_time_ns, *std::max_element(r.wall_time_ns.begin(), r.wall_time_ns.end()));
    }
    emit_overhead_report(ms, dir / "o.csv");
    auto const rows = parse_csv(read_text_file(dir / "o.csv"));
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0].size(), 7u);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"generation", "1", "8", "8", "", "", ""}));
    EXPECT_EQ(rows[6][0], "aggregation");
    EXPECT_EQ(rows[6][1], "4");
    EXPECT_EQ(rows[3][2], "2.000003");
}

TEST(Overhead, SingleRunTwoRows) {
    TempDir dir;
    emit_overhead_report({timed_manifest(1, 1, 1'000'000)}, dir / "o.csv");
    EXPECT_EQ(parse_csv(read_text_file(dir / "o.csv")).size(), 3u);
    EXPECT_EQ(overhead_records({timed_manifest(3, std::nullopt, 5)}).size(), 1u);
    EXPECT_ERROR_KIND((void)overhead_records({}), ErrorKind::EmptyInput);
}

TEST(Svg, TimeseriesOnePolylineThreeVertices) {
    auto const svg = render_svg_text(
        "trace_label,elapsed_s,stall_total_ns,stall_std_ns\n0,0,1,0\n0,1,5,1\n0,2,3,0\n", PlotKind::Timeseries
    );
    auto const lines = polylines(svg);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0].size(), 3u);
    EXPECT_TRUE(well_formed_xml(svg));
    EXPECT_EQ(svg.find("href"), std::string::npos);
    EXPECT_NE(svg.find("<line"), std::string::npos);
}

TEST(Svg, ParcoordsFivePolylinesNineAxes) {
    std::string csv =
        "interval_start_s,stall_total_ns,kernel_count,htod_count,dtoh_count,dtod_count,htod_bytes,dtoh_bytes,"
        "dtod_bytes,stall_std_ns\n";
    for (int i = 0; i < 5; ++i) {
        csv += fmt::format("{},{},{},{},{},0,{},{},0,{}\n", i, 100 * i, i, i, i + 1, i * 8, i * 9, 10 - i);
    }
    auto const svg = render_svg_text(csv, PlotKind::Parcoords);
    auto const lines = polylines(svg);
    ASSERT_EQ(lines.size(), 5u);
    std::set<double> axes;
    for (auto const& l : lines) {
        EXPECT_EQ(l.size(), 9u);
        axes.insert(l.begin(), l.end());
    }
    EXPECT_EQ(axes.size(), 9u);
    EXPECT_EQ(count_of(svg, "<line"), 9u);
    EXPECT_TRUE(well_formed_xml(svg));
}

TEST(Svg, EmptyCsvSaysNoData) {
    for (auto const& [csv, kind] : std::vector<std::pair<std::string, PlotKind>>{
             {"trace_label,elapsed_s,stall_total_ns,stall_std_ns\n", PlotKind::Timeseries},
             {"interval_start_s,stall_total_ns,kernel_count,htod_count,dtoh_count,dtod_count,htod_bytes,"
              "dtoh_bytes,dtod_bytes,stall_std_ns\n",
              PlotKind::Parcoords},
             {"phase,world_size,max_wall_s,rank0_wall_s\n", PlotKind::OverheadBars}
         }) {
        auto const svg = render_svg_text(csv, kind);
        EXPECT_NE(svg.find("no data"), std::string::npos);
        EXPECT_NE(svg.find("<line"), std::string::npos);
        EXPECT_TRUE(polylines(svg).empty());
        EXPECT_TRUE(well_formed_xml(svg));
    }
}

TEST(Svg, OverheadBarsPerRow) {
    auto const svg = render_svg_text(
        "phase,world_size,max_wall_s,rank0_wall_s,rank1_wall_s\ngeneration,1,2,2,\ngeneration,2,1.5,1,1.5\n",
        PlotKind::OverheadBars
    );
    EXPECT_EQ(count_of(svg, "<rect"), 3u);  // background plus two bars
    EXPECT_TRUE(well_formed_xml(svg));
}

TEST(Svg, MalformedCsv) {
    EXPECT_ERROR_KIND((void)render_svg_text("", PlotKind::Timeseries), ErrorKind::MalformedCsv);
    EXPECT_ERROR_KIND((void)render_svg_text("a,b\n1,2\n", PlotKind::Timeseries), ErrorKind::MalformedCsv);
    EXPECT_ERROR_KIND(
        (void)render_svg_text("trace_label,elapsed_s,stall_total_ns,stall_std_ns\n0,x,1,1\n", PlotKind::Timeseries),
        ErrorKind::MalformedCsv
    );
    EXPECT_ERROR_KIND(
        (void)render_svg_text("trace_label,elapsed_s,stall_total_ns,stall_std_ns\n0,1,1\n", PlotKind::Timeseries),
        ErrorKind::MalformedCsv
    );
    EXPECT_ERROR_KIND(
        (void)render_svg_text("phase,world_size,max_wall_s\nwarmup,1,2\n", PlotKind::OverheadBars),
        ErrorKind::MalformedCsv
    );
}

TEST(Svg, FileRoundTrip) {
    TempDir dir;
    IntervalStatsMap stats;
    stats[0] = interval(0, 0, 3, 1);
    emit_stall_timeseries({{0, Timestamp{0}, &stats}}, dir / "t.csv");
    render_svg(dir / "t.csv", PlotKind::Timeseries, dir / "t.svg");
    auto const svg = read_text_file(dir / "t.svg");
    EXPECT_TRUE(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    EXPECT_TRUE(well_formed_xml(svg));
}
