/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <chrono>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <shardprof/aggregation.hpp>
#include <shardprof/error.hpp>
#include <shardprof/parquet.hpp>
#include <shardprof/serialize.hpp>
#include <shardprof/shard_file.hpp>
#include <shardprof/stats.hpp>

namespace shardprof {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t kind_total(
    std::map<CopyKind, std::uint64_t> const& m, CopyKind::Tag tag
) {
    std::uint64_t n = 0;
    for (auto const& [kind, v] : m) {
        if (kind.tag() == tag) {
            n += v;
        }
    }
    return n;
}

}  // namespace

std::uint64_t IntervalStats::count_of(CopyKind::Tag tag) const {
    return kind_total(memcpy_count_by_kind, tag);
}

std::uint64_t IntervalStats::bytes_of(CopyKind::Tag tag) const {
    return kind_total(bytes_by_kind, tag);
}

IntervalKey interval_of(Timestamp t, Timestamp t0, Nanoseconds interval_ns) {
    SHARDPROF_EXPECTS(interval_ns >= 1, ErrorKind::InvalidArgument, "interval_ns must be >= 1");
    SHARDPROF_EXPECTS(
        t0 <= t,
        ErrorKind::OutOfRange,
        fmt::format("timestamp {} precedes origin {}", t.ns(), t0.ns())
    );
    auto const index = t.since(t0) / interval_ns;
    return IntervalKey{index, Timestamp{t0.ns() + index * interval_ns}};
}

Nanoseconds stall_duration(MemcpyRecord const& m, TimeWindow interval) {
    auto const lo = std::max(m.start, interval.begin);
    auto const hi = std::min(m.end, interval.end);
    return lo < hi ? hi.since(lo) : 0;
}

Nanoseconds stall_duration(JoinedSample const& sample, TimeWindow interval) {
    SHARDPROF_EXPECTS(
        sample.memcpy.has_value(), ErrorKind::InvalidArgument, "sample has no memcpy record"
    );
    return stall_duration(*sample.memcpy, interval);
}

// ---------------------------------------------------------------------------
// IntervalAccumulator

IntervalAccumulator::IntervalAccumulator(Timestamp t0, Nanoseconds interval_ns)
    : t0_{t0}, interval_ns_{interval_ns} {
    SHARDPROF_EXPECTS(interval_ns >= 1, ErrorKind::InvalidArgument, "interval_ns must be >= 1");
}

IntervalAccumulator::Partial& IntervalAccumulator::at(std::uint64_t index) {
    return partials_[index];
}

void IntervalAccumulator::add(JoinedSample const& sample, bool first_of_kernel) {
    if (first_of_kernel) {
        auto const k = std::max(sample.kernel.start, t0_);
        ++at(k.since(t0_) / interval_ns_).kernel_count;
    }
    if (!sample.memcpy) {
        return;
    }
    auto const& m = *sample.memcpy;
    auto const s = std::max(m.start, t0_);
    auto const e = std::max(m.end, s);
    auto const first = s.since(t0_) / interval_ns_;

    auto& head = at(first);
    auto& kind = head.kinds[m.copy_kind.raw()];
    ++kind.first;
    kind.second += m.bytes;

    if (e == s) {
        head.samples.push_back(0);
        return;
    }
    auto const last = (e.ns() - 1 - t0_.ns()) / interval_ns_;
    for (auto i = first; i <= last; ++i) {
        auto const begin = Timestamp{t0_.ns() + i * interval_ns_};
        auto const window = TimeWindow{begin, begin.plus(interval_ns_)};
        at(i).samples.push_back(stall_duration(MemcpyRecord{s, e, 0, m.copy_kind, 0, 0}, window));
    }
}

void IntervalAccumulator::add_shard_file(std::filesystem::path const& path) {
    ShardFileReader reader{path};
    std::optional<KernelRecord> previous;
    reader.for_each([&](JoinedSample const& s) {
        bool const first = !previous || !(*previous == s.kernel);
        if (first) {
            previous = s.kernel;
        }
        add(s, first);
    });
}

Bytes IntervalAccumulator::encode_for_owner(int owner, int world_size) const {
    ByteWriter w;
    std::uint64_t n = 0;
    for (auto const& [index, p] : partials_) {
        n += interval_owner(index, world_size) == owner ? 1 : 0;
    }
    w.put<std::uint64_t>(n);
    for (auto const& [index, p] : partials_) {
        if (interval_owner(index, world_size) != owner) {
            continue;
        }
        w.put<std::uint64_t>(index);
        w.put<std::uint64_t>(p.kernel_count);
        w.put<std::uint64_t>(p.kinds.size());
        for (auto const& [raw, cb] : p.kinds) {
            w.put<std::int64_t>(raw);
            w.put<std::uint64_t>(cb.first);
            w.put<std::uint64_t>(cb.second);
        }
        w.put_span<std::uint64_t>(p.samples);
    }
    return std::move(w).take();
}

void IntervalAccumulator::merge(Bytes const& encoded) {
    ByteReader r{encoded};
    auto const n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
        auto& p = at(r.get<std::uint64_t>());
        p.kernel_count += r.get<std::uint64_t>();
        auto const kinds = r.get<std::uint64_t>();
        for (std::uint64_t k = 0; k < kinds; ++k) {
            auto const raw = r.get<std::int64_t>();
            auto& cb = p.kinds[raw];
            cb.first += r.get<std::uint64_t>();
            cb.second += r.get<std::uint64_t>();
        }
        r.get_into(p.samples);
    }
    SHARDPROF_EXPECTS(r.done(), ErrorKind::MalformedFile, "trailing bytes in interval partials");
}

IntervalStatsMap IntervalAccumulator::finalize() const {
    IntervalStatsMap out;
    for (auto const& [index, p] : partials_) {
        IntervalStats st;
        st.key = IntervalKey{index, Timestamp{t0_.ns() + index * interval_ns_}};
        st.kernel_count = p.kernel_count;
        for (auto const& [raw, cb] : p.kinds) {
            st.memcpy_count_by_kind[decode_copy_kind(raw)] = cb.first;
            st.bytes_by_kind[decode_copy_kind(raw)] = cb.second;
        }
        st.sample_count = p.samples.size();
        if (!p.samples.empty()) {
            auto const [mn, mx] = std::minmax_element(p.samples.begin(), p.samples.end());
            st.stall_min = *mn;
            st.stall_max = *mx;
            for (auto v : p.samples) {
                st.stall_total += v;
            }
            st.stall_std = stats::population_std(std::span<std::uint64_t const>{p.samples});
        }
        out.emplace(index, std::move(st));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Collective statistics

namespace {

void put_stats(ByteWriter& w, IntervalStats const& s) {
    w.put<std::uint64_t>(s.key.index);
    w.put<std::uint64_t>(s.key.start.ns());
    w.put<std::uint64_t>(s.stall_min);
    w.put<std::uint64_t>(s.stall_max);
    w.put<double>(s.stall_std);
    w.put<std::uint64_t>(s.stall_total);
    w.put<std::uint64_t>(s.kernel_count);
    w.put<std::uint64_t>(s.sample_count);
    w.put<std::uint64_t>(s.memcpy_count_by_kind.size());
    for (auto const& [kind, count] : s.memcpy_count_by_kind) {
        w.put<std::int64_t>(kind.raw());
        w.put<std::uint64_t>(count);
        w.put<std::uint64_t>(s.bytes_by_kind.at(kind));
    }
}

IntervalStats get_stats(ByteReader& r) {
    IntervalStats s;
    s.key.index = r.get<std::uint64_t>();
    s.key.start = Timestamp{r.get<std::uint64_t>()};
    s.stall_min = r.get<std::uint64_t>();
    s.stall_max = r.get<std::uint64_t>();
    s.stall_std = r.get<double>();
    s.stall_total = r.get<std::uint64_t>();
    s.kernel_count = r.get<std::uint64_t>();
    s.sample_count = r.get<std::uint64_t>();
    auto const kinds = r.get<std::uint64_t>();
    for (std::uint64_t k = 0; k < kinds; ++k) {
        auto const kind = decode_copy_kind(r.get<std::int64_t>());
        s.memcpy_count_by_kind[kind] = r.get<std::uint64_t>();
        s.bytes_by_kind[kind] = r.get<std::uint64_t>();
    }
    return s;
}

void check_manifest_files(Manifest const& m, std::filesystem::path const& run_dir) {
    SHARDPROF_EXPECTS(
        m.files.size() == static_cast<std::size_t>(m.config.num_shards),
        ErrorKind::ManifestMismatch,
        fmt::format("manifest lists {} files for {} shards", m.files.size(), m.config.num_shards)
    );
    for (std::size_t i = 0; i < m.files.size(); ++i) {
        SHARDPROF_EXPECTS(
            m.files[i].shard_index == static_cast<std::int64_t>(i),
            ErrorKind::ManifestMismatch,
            fmt::format("manifest has no file for shard {}", i)
        );
        SHARDPROF_EXPECTS(
            std::filesystem::exists(run_dir / m.files[i].path),
            ErrorKind::IoError,
            fmt::format("shard file {} is missing", (run_dir / m.files[i].path).string())
        );
    }
}

}  // namespace

std::optional<IntervalStatsMap> compute_interval_stats(
    Manifest const& manifest,
    std::filesystem::path const& run_dir,
    AggregationConfig const& cfg,
    Communicator& comm
) {
    cfg.validate();
    check_manifest_files(manifest, run_dir);
    auto const& ctx = comm.ctx();
    auto const t0 = manifest.config.range_start;

    PartitionConfig blocks = manifest.config;
    blocks.num_workers = ctx.world_size;
    auto const block = block_of(blocks, ctx.rank);

    IntervalAccumulator local{t0, cfg.interval_ns};
    for (auto s = block.first; s < block.last; ++s) {
        auto const& meta = manifest.files[static_cast<std::size_t>(s)];
        ShardFileReader probe{run_dir / meta.path};
        SHARDPROF_EXPECTS(
            probe.num_rows() == meta.row_count,
            ErrorKind::ManifestMismatch,
            fmt::format(
                "{} holds {} rows, manifest says {}", meta.path.string(), probe.num_rows(), meta.row_count
            )
        );
        local.add_shard_file(run_dir / meta.path);
    }

    // Round-robin ownership: owner o merges every rank's partials for its
    // intervals, in rank order.
    IntervalAccumulator owned{t0, cfg.interval_ns};
    for (int owner = 0; owner < ctx.world_size; ++owner) {
        auto got = comm.gather(local.encode_for_owner(owner, ctx.world_size), owner);
        if (got) {
            for (auto const& part : *got) {
                owned.merge(part);
            }
        }
    }
    auto const finished = owned.finalize();

    ByteWriter w;
    w.put<std::uint64_t>(finished.size());
    for (auto const& [index, st] : finished) {
        put_stats(w, st);
    }
    auto gathered = comm.gather_to_root(std::move(w).take());
    if (!gathered) {
        return std::nullopt;
    }

    IntervalStatsMap all;
    for (auto const& bytes : *gathered) {
        ByteReader r{bytes};
        auto const n = r.get<std::uint64_t>();
        for (std::uint64_t i = 0; i < n; ++i) {
            auto st = get_stats(r);
            all.emplace(st.key.index, std::move(st));
        }
    }
    auto const span = manifest.config.range_end.since(t0);
    std::uint64_t count = span / cfg.interval_ns + (span % cfg.interval_ns != 0 ? 1 : 0);
    if (!all.empty()) {
        count = std::max(count, all.rbegin()->first + 1);
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!all.contains(i)) {
            IntervalStats empty;
            empty.key = IntervalKey{i, Timestamp{t0.ns() + i * cfg.interval_ns}};
            all.emplace(i, std::move(empty));
        }
    }
    return all;
}

std::map<std::int64_t, double> shard_variability(
    IntervalStatsMap const& stats,
    std::vector<ShardSpec> const& shards,
    Timestamp t0,
    AggregationConfig const& cfg
) {
    std::map<std::int64_t, double> out;
    auto const step = cfg.interval_ns;
    auto first_start_at_or_after = [&](Timestamp t) -> std::uint64_t {
        if (t <= t0) {
            return 0;
        }
        auto const d = t.since(t0);
        return d / step + (d % step != 0 ? 1 : 0);
    };
    for (auto const& shard : shards) {
        auto const lo = first_start_at_or_after(shard.window.begin);
        auto const hi = first_start_at_or_after(shard.window.end);
        std::vector<std::uint64_t> totals;
        for (auto it = stats.lower_bound(lo); it != stats.end() && it->first < hi; ++it) {
            if (!it->second.empty()) {
                totals.push_back(it->second.stall_total);
            }
        }
        out[shard.index] = totals.size() < 2 ? 0.0 : stats::population_std(totals);
    }
    return out;
}

AnomalyReport iqr_anomalies(
    std::map<std::int64_t, double> const& metrics, AggregationConfig const& cfg
) {
    SHARDPROF_EXPECTS(!metrics.empty(), ErrorKind::EmptyInput, "no shard metrics");
    std::vector<double> sorted;
    sorted.reserve(metrics.size());
    for (auto const& [shard, m] : metrics) {
        sorted.push_back(m);
    }
    std::sort(sorted.begin(), sorted.end());

    AnomalyReport rep;
    rep.q1 = stats::quantile_sorted(sorted, 0.25);
    rep.q3 = stats::quantile_sorted(sorted, 0.75);
    rep.iqr = rep.q3 - rep.q1;
    rep.upper_fence = rep.q3 + 1.5 * rep.iqr;
    for (auto const& [shard, m] : metrics) {
        if (m > rep.upper_fence) {
            rep.flagged_shards.push_back(ShardAnomaly{shard, m, m - rep.upper_fence});
        }
    }
    rep.top_shards = rep.flagged_shards;
    std::stable_sort(rep.top_shards.begin(), rep.top_shards.end(), [](auto const& a, auto const& b) {
        if (a.exceedance != b.exceedance) {
            return a.exceedance > b.exceedance;
        }
        return a.shard_index < b.shard_index;
    });
    if (rep.top_shards.size() > static_cast<std::size_t>(cfg.top_k_shards)) {
        rep.top_shards.resize(static_cast<std::size_t>(cfg.top_k_shards));
    }
    return rep;
}

std::vector<IntervalKey> top_variability_intervals(
    IntervalStatsMap const& stats, AggregationConfig const& cfg
) {
    std::vector<IntervalStats const*> ranked;
    for (auto const& [index, st] : stats) {
        if (!st.empty()) {
            ranked.push_back(&st);
        }
    }
    SHARDPROF_EXPECTS(!ranked.empty(), ErrorKind::EmptyInput, "no non-empty intervals");
    std::stable_sort(ranked.begin(), ranked.end(), [](auto const* a, auto const* b) {
        if (a->stall_std != b->stall_std) {
            return a->stall_std > b->stall_std;
        }
        return a->key.index < b->key.index;
    });
    auto const keep = cfg.variability_fraction.ceil_times(ranked.size());
    std::vector<IntervalKey> out;
    for (std::size_t i = 0; i < keep && i < ranked.size(); ++i) {
        out.push_back(ranked[i]->key);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stage driver and outputs

namespace {

using parquet::ColumnSpec;
using parquet::PhysicalType;

std::vector<ColumnSpec> const& interval_schema() {
    static std::vector<ColumnSpec> const schema{
        {"interval_index", PhysicalType::Int64, false, true},
        {"interval_start_ns", PhysicalType::Int64, false, true},
        {"stall_min_ns", PhysicalType::Int64, false, true},
        {"stall_max_ns", PhysicalType::Int64, false, true},
        {"stall_std_ns", PhysicalType::Double, false, false},
        {"stall_total_ns", PhysicalType::Int64, false, true},
        {"kernel_count", PhysicalType::Int64, false, true},
        {"sample_count", PhysicalType::Int64, false, true},
        {"htod_count", PhysicalType::Int64, false, true},
        {"dtoh_count", PhysicalType::Int64, false, true},
        {"dtod_count", PhysicalType::Int64, false, true},
        {"other_count", PhysicalType::Int64, false, true},
        {"htod_bytes", PhysicalType::Int64, false, true},
        {"dtoh_bytes", PhysicalType::Int64, false, true},
        {"dtod_bytes", PhysicalType::Int64, false, true},
        {"other_bytes", PhysicalType::Int64, false, true},
    };
    return schema;
}

constexpr std::array<CopyKind::Tag, 4> kTags{
    CopyKind::Tag::HtoD, CopyKind::Tag::DtoH, CopyKind::Tag::DtoD, CopyKind::Tag::Other
};

std::uint64_t elapsed_ns(Clock::time_point since) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count()
    );
}

}  // namespace

void write_interval_stats(std::filesystem::path const& path, IntervalStatsMap const& stats) {
    parquet::Writer w{path, interval_schema()};
    for (auto const& [index, s] : stats) {
        std::size_t c = 0;
        auto put = [&](std::uint64_t v) { w.put_int(c++, static_cast<std::int64_t>(v)); };
        put(s.key.index);
        put(s.key.start.ns());
        put(s.stall_min);
        put(s.stall_max);
        w.put_double(c++, s.stall_std);
        put(s.stall_total);
        put(s.kernel_count);
        put(s.sample_count);
        for (auto tag : kTags) {
            put(s.count_of(tag));
        }
        for (auto tag : kTags) {
            put(s.bytes_of(tag));
        }
        w.end_row();
    }
    w.close();
}

IntervalStatsMap read_interval_stats(std::filesystem::path const& path) {
    parquet::Reader r{path};
    SHARDPROF_EXPECTS(
        r.schema() == interval_schema(),
        ErrorKind::SchemaMismatch,
        fmt::format("{} does not have the interval statistics schema", path.string())
    );
    IntervalStatsMap out;
    std::array<CopyKind, 4> const kinds{
        CopyKind::htod(), CopyKind::dtoh(), CopyKind::dtod(), decode_copy_kind(0)
    };
    for (std::size_t g = 0; g < r.num_row_groups(); ++g) {
        auto const cols = r.read_row_group(g);
        for (std::size_t i = 0; i < cols[0].ints.size(); ++i) {
            auto u = [&](std::size_t c) { return static_cast<std::uint64_t>(cols[c].ints[i]); };
            IntervalStats s;
            s.key = IntervalKey{u(0), Timestamp{u(1)}};
            s.stall_min = u(2);
            s.stall_max = u(3);
            s.stall_std = cols[4].doubles[i];
            s.stall_total = u(5);
            s.kernel_count = u(6);
            s.sample_count = u(7);
            for (std::size_t k = 0; k < 4; ++k) {
                if (u(8 + k) != 0 || u(12 + k) != 0) {
                    s.memcpy_count_by_kind[kinds[k]] = u(8 + k);
                    s.bytes_by_kind[kinds[k]] = u(12 + k);
                }
            }
            out.emplace(s.key.index, std::move(s));
        }
    }
    return out;
}

nlohmann::ordered_json anomalies_to_json(
    AnomalyReport const& report,
    std::map<std::int64_t, double> const& shard_metrics,
    IntervalStatsMap const& stats,
    AggregationConfig const& cfg
) {
    auto shard = [](ShardAnomaly const& a) {
        return nlohmann::ordered_json{
            {"shard_index", a.shard_index}, {"metric", a.metric}, {"exceedance", a.exceedance}
        };
    };
    nlohmann::ordered_json j;
    j["interval_ns"] = cfg.interval_ns;
    j["top_k_shards"] = cfg.top_k_shards;
    j["variability_fraction"] = cfg.variability_fraction.to_string();
    j["q1"] = report.q1;
    j["q3"] = report.q3;
    j["iqr"] = report.iqr;
    j["upper_fence"] = report.upper_fence;
    auto metrics = nlohmann::ordered_json::array();
    for (auto const& [index, m] : shard_metrics) {
        metrics.push_back({{"shard_index", index}, {"metric", m}});
    }
    j["shard_metrics"] = std::move(metrics);
    auto flagged = nlohmann::ordered_json::array();
    for (auto const& a : report.flagged_shards) {
        flagged.push_back(shard(a));
    }
    j["flagged_shards"] = std::move(flagged);
    auto top = nlohmann::ordered_json::array();
    for (auto const& a : report.top_shards) {
        top.push_back(shard(a));
    }
    j["top_shards"] = std::move(top);
    auto intervals = nlohmann::ordered_json::array();
    for (auto const& k : report.top_intervals) {
        auto const& st = stats.at(k.index);
        intervals.push_back({
            {"index", k.index},
            {"start_ns", k.start.ns()},
            {"stall_std_ns", st.stall_std},
            {"stall_total_ns", st.stall_total},
        });
    }
    j["top_intervals"] = std::move(intervals);
    return j;
}

std::optional<AggregationResult> run_aggregation(
    std::filesystem::path const& run_dir,
    AggregationConfig const& cfg,
    Communicator& comm,
    AggregationExpectations const& expect
) {
    auto const started = Clock::now();
    auto manifest = Manifest::load(run_dir / kManifestName);

    PartitionConfig flags = manifest.config;
    if (expect.num_shards) {
        flags.num_shards = *expect.num_shards;
    }
    if (expect.range) {
        flags.range_start = expect.range->begin;
        flags.range_end = expect.range->end;
    }
    SHARDPROF_EXPECTS(
        partition_hash(flags) == manifest.config_hash(),
        ErrorKind::ManifestMismatch,
        fmt::format(
            "{} was generated with N={} range=[{}, {}) but aggregation expects N={} range=[{}, {})",
            (run_dir / kManifestName).string(),
            manifest.config.num_shards,
            manifest.config.range_start.ns(),
            manifest.config.range_end.ns(),
            flags.num_shards,
            flags.range_start.ns(),
            flags.range_end.ns()
        )
    );

    auto stats = compute_interval_stats(manifest, run_dir, cfg, comm);

    std::optional<AggregationResult> result;
    if (stats) {
        AggregationResult r;
        r.stats = std::move(*stats);
        r.shard_metrics =
            shard_variability(r.stats, make_shards(manifest.config), manifest.config.range_start, cfg);
        r.report = iqr_anomalies(r.shard_metrics, cfg);
        bool const any_data =
            std::any_of(r.stats.begin(), r.stats.end(), [](auto const& kv) { return !kv.second.empty(); });
        if (any_data) {
            r.report.top_intervals = top_variability_intervals(r.stats, cfg);
        }
        write_interval_stats(run_dir / kIntervalStatsName, r.stats);
        write_file_atomic(
            run_dir / kAnomaliesName,
            anomalies_to_json(r.report, r.shard_metrics, r.stats, cfg).dump(2) + "\n"
        );
        result = std::move(r);
    }

    ByteWriter w;
    w.put<std::uint64_t>(elapsed_ns(started));
    auto walls = comm.gather_to_root(std::move(w).take());
    if (walls) {
        for (std::size_t rank = 0; rank < walls->size(); ++rank) {
            ByteReader rd{(*walls)[rank]};
            manifest.timings[static_cast<int>(rank)].aggregation_ns = rd.get<std::uint64_t>();
        }
        manifest.aggregation_workers = comm.ctx().world_size;
        manifest.save(run_dir / kManifestName);
    }
    comm.barrier();
    return result;
}

}  // namespace shardprof
