/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/manifest.hpp>
#include <shardprof/sqlite.hpp>
#include <shardprof/synth.hpp>

__extension__ using u128 = unsigned __int128;

namespace shardprof::synth {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent draw streams.
enum Stream : std::uint64_t {
    KernelStart = 1,
    KernelLength,
    KernelKey,
    KernelShape,
    MemcpyStart,
    MemcpyLength,
    MemcpyKey,
    MemcpyBytes,
    Gpu,
};

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return splitmix64(splitmix64(seed_ ^ splitmix64(stream)) + counter);
}

double CounterRng::unit(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t stream, std::uint64_t counter, std::uint64_t n)
    const noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<u128>(bits(stream, counter)) * n) >> 64
    );
}

void SynthSpec::validate() const {
    auto const bad = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
    SHARDPROF_EXPECTS(!bad(duration_s), ErrorKind::InvalidArgument, "duration_s must be >= 0");
    SHARDPROF_EXPECTS(!bad(kernels_per_s), ErrorKind::InvalidArgument, "kernels_per_s must be >= 0");
    SHARDPROF_EXPECTS(!bad(memcpys_per_s), ErrorKind::InvalidArgument, "memcpys_per_s must be >= 0");
    SHARDPROF_EXPECTS(
        devices >= 1 && streams_per_device >= 1,
        ErrorKind::InvalidArgument,
        "devices and streams_per_device must be >= 1"
    );
    SHARDPROF_EXPECTS(
        std::none_of(direction_ratio.begin(), direction_ratio.end(), bad)
            && std::any_of(direction_ratio.begin(), direction_ratio.end(), [](double w) { return w > 0; }),
        ErrorKind::InvalidArgument,
        "direction weights must be >= 0 with at least one positive"
    );
    SHARDPROF_EXPECTS(kernel_names >= 1, ErrorKind::InvalidArgument, "kernel_names must be >= 1");
    SHARDPROF_EXPECTS(max_copy_bytes >= 1, ErrorKind::InvalidArgument, "max_copy_bytes must be >= 1");
    for (auto const& b : stall_bursts) {
        SHARDPROF_EXPECTS(
            !bad(b.time_s) && !bad(b.width_s) && b.width_s > 0 && !bad(b.amplitude),
            ErrorKind::InvalidArgument,
            "bursts need time >= 0, width > 0 and amplitude >= 0"
        );
    }
}

namespace {

Nanoseconds to_ns(double seconds) {
    return static_cast<Nanoseconds>(std::llround(seconds * 1e9));
}

/// Stratified starts: one per slot of width duration / n, jittered in the slot, the first exactly at 0.
std::vector<Nanoseconds> stratified(
    CounterRng const& rng, Stream stream, std::uint64_t n, Nanoseconds duration
) {
    std::vector<Nanoseconds> out(n);
    auto const slot = static_cast<double>(duration) / static_cast<double>(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        auto const jitter = i == 0 ? 0.0 : rng.unit(stream, i);
        out[i] = static_cast<Nanoseconds>((static_cast<double>(i) + jitter) * slot);
    }
    return out;
}

}  // namespace

TraceRecords generate_records(SynthSpec const& spec) {
    spec.validate();
    CounterRng const rng{spec.seed};
    auto const duration = to_ns(spec.duration_s);
    auto const n_kernels = static_cast<std::uint64_t>(std::llround(spec.duration_s * spec.kernels_per_s));
    auto const n_memcpys = static_cast<std::uint64_t>(std::llround(spec.duration_s * spec.memcpys_per_s));
    auto const streams = static_cast<std::uint64_t>(spec.streams_per_device);
    auto const keys = static_cast<std::uint64_t>(spec.devices) * streams;
    Timestamp const origin{spec.origin_ns};

    TraceRecords rec;
    rec.kernels.reserve(n_kernels);
    auto const kernel_slot = n_kernels == 0 ? 0.0 : static_cast<double>(duration) / static_cast<double>(n_kernels);
    auto const kstarts = stratified(rng, KernelStart, n_kernels, duration);
    for (std::uint64_t i = 0; i < n_kernels; ++i) {
        KernelRecord k;
        k.start = origin.plus(kstarts[i]);
        auto const len = 1 + static_cast<Nanoseconds>(kernel_slot * (0.25 + 0.5 * rng.unit(KernelLength, i)));
        k.end = k.start.plus(len);
        auto const key = rng.below(KernelKey, i, keys);
        k.device_id = static_cast<std::int32_t>(key / streams);
        k.stream_id = static_cast<std::int32_t>(7 + key % streams);
        auto const shape = rng.bits(KernelShape, i);
        k.name_id = static_cast<std::int64_t>(shape % static_cast<std::uint64_t>(spec.kernel_names));
        k.grid = {static_cast<std::int32_t>(1 + (shape >> 8) % 1024), 1 + static_cast<std::int32_t>((shape >> 20) % 4), 1};
        k.block = {static_cast<std::int32_t>(32 << ((shape >> 24) % 5)), 1, 1};
        k.registers_per_thread = static_cast<std::int32_t>(16 + (shape >> 32) % 112);
        k.shared_mem_bytes = static_cast<std::int64_t>(((shape >> 40) % 13) * 4096);
        rec.kernels.push_back(k);
    }

    std::vector<std::pair<Nanoseconds, Nanoseconds>> bursts;
    for (auto const& b : spec.stall_bursts) {
        bursts.emplace_back(to_ns(b.time_s), to_ns(b.time_s + b.width_s));
    }

    // Smooth weighted round-robin keeps every prefix close to the direction ratio.
    std::array<CopyKind, 3> const kinds{CopyKind::htod(), CopyKind::dtoh(), CopyKind::dtod()};
    std::array<double, 3> credit{0, 0, 0};
    double const total_weight = spec.direction_ratio[0] + spec.direction_ratio[1] + spec.direction_ratio[2];

    rec.memcpys.reserve(n_memcpys);
    auto const mstarts = stratified(rng, MemcpyStart, n_memcpys, duration);
    for (std::uint64_t i = 0; i < n_memcpys; ++i) {
        MemcpyRecord m;
        auto const offset = mstarts[i];
        m.start = origin.plus(offset);
        double len = static_cast<double>(spec.memcpy_duration_ns) * (0.5 + rng.unit(MemcpyLength, i));
        for (std::size_t b = 0; b < bursts.size(); ++b) {
            if (bursts[b].first <= offset && offset < bursts[b].second) {
                len *= spec.stall_bursts[b].amplitude;
            }
        }
        m.end = m.start.plus(static_cast<Nanoseconds>(len));
        auto const key = rng.below(MemcpyKey, i, keys);
        m.device_id = static_cast<std::int32_t>(key / streams);
        m.stream_id = static_cast<std::int32_t>(7 + key % streams);
        m.bytes = 1 + rng.below(MemcpyBytes, i, spec.max_copy_bytes);

        std::size_t pick = 0;
        for (std::size_t d = 0; d < 3; ++d) {
            credit[d] += spec.direction_ratio[d];
            if (credit[d] > credit[pick]) {
                pick = d;
            }
        }
        credit[pick] -= total_weight;
        m.copy_kind = kinds[pick];
        rec.memcpys.push_back(m);
    }

    for (int d = 0; d < spec.devices; ++d) {
        auto const u = rng.bits(Gpu, static_cast<std::uint64_t>(d));
        GpuInfo g;
        g.device_id = d;
        g.global_mem_bytes = (std::uint64_t{16} + 8 * (u % 11)) << 30;
        g.bandwidth_kb_per_s = 900'000'000 + (u >> 8) % 1'000'000'000;
        g.sm_count = 80 + static_cast<std::int32_t>((u >> 40) % 53);
        g.compute_capability_major = 8;
        g.compute_capability_minor = static_cast<std::int32_t>((u >> 56) % 2) * 6;
        rec.gpus.push_back(g);
    }
    return rec;
}

GroundTruth ground_truth_of(SynthSpec const& spec, TraceRecords const& records) {
    GroundTruth gt;
    gt.kernel_count = records.kernels.size();
    gt.memcpy_count = records.memcpys.size();
    for (auto const& k : records.kernels) {
        ++gt.keys[{k.device_id, k.stream_id}].kernels;
    }
    for (auto const& m : records.memcpys) {
        ++gt.keys[{m.device_id, m.stream_id}].memcpys;
        switch (m.copy_kind.tag()) {
        case CopyKind::Tag::HtoD:
            ++gt.htod_count;
            break;
        case CopyKind::Tag::DtoH:
            ++gt.dtoh_count;
            break;
        case CopyKind::Tag::DtoD:
            ++gt.dtod_count;
            break;
        case CopyKind::Tag::Other:
            break;
        }
    }
    for (auto const& [key, mult] : gt.keys) {
        gt.expected_join_rows += mult.kernels * std::max<std::uint64_t>(1, mult.memcpys);
    }
    if (!records.kernels.empty()) {
        auto lo = records.kernels.front().start;
        auto hi = records.kernels.front().end;
        for (auto const& k : records.kernels) {
            lo = std::min(lo, k.start);
            hi = std::max(hi, k.end);
        }
        gt.kernel_range = TimeWindow{lo, hi.plus(1)};
    }
    Timestamp const origin{spec.origin_ns};
    for (auto const& b : spec.stall_bursts) {
        gt.bursts.push_back(TimeWindow{origin.plus(to_ns(b.time_s)), origin.plus(to_ns(b.time_s + b.width_s))});
    }
    return gt;
}

nlohmann::ordered_json GroundTruth::to_json() const {
    nlohmann::ordered_json j;
    j["kernel_count"] = kernel_count;
    j["memcpy_count"] = memcpy_count;
    j["expected_join_rows"] = expected_join_rows;
    j["kernel_range"] = {kernel_range.begin.ns(), kernel_range.end.ns()};
    j["direction_counts"] = {{"htod", htod_count}, {"dtoh", dtoh_count}, {"dtod", dtod_count}};
    auto k = nlohmann::ordered_json::array();
    for (auto const& [key, mult] : keys) {
        k.push_back({
            {"device_id", key.first},
            {"stream_id", key.second},
            {"kernels", mult.kernels},
            {"memcpys", mult.memcpys},
        });
    }
    j["keys"] = std::move(k);
    auto b = nlohmann::ordered_json::array();
    for (auto const& w : bursts) {
        b.push_back({w.begin.ns(), w.end.ns()});
    }
    j["bursts"] = std::move(b);
    return j;
}

GroundTruth GroundTruth::from_json(nlohmann::json const& j) {
    try {
        GroundTruth gt;
        gt.kernel_count = j.at("kernel_count").get<std::uint64_t>();
        gt.memcpy_count = j.at("memcpy_count").get<std::uint64_t>();
        gt.expected_join_rows = j.at("expected_join_rows").get<std::uint64_t>();
        gt.kernel_range = TimeWindow{
            Timestamp{j.at("kernel_range").at(0).get<std::uint64_t>()},
            Timestamp{j.at("kernel_range").at(1).get<std::uint64_t>()}
        };
        gt.htod_count = j.at("direction_counts").at("htod").get<std::uint64_t>();
        gt.dtoh_count = j.at("direction_counts").at("dtoh").get<std::uint64_t>();
        gt.dtod_count = j.at("direction_counts").at("dtod").get<std::uint64_t>();
        for (auto const& k : j.at("keys")) {
            gt.keys[{k.at("device_id").get<std::int32_t>(), k.at("stream_id").get<std::int32_t>()}] = {
                k.at("kernels").get<std::uint64_t>(), k.at("memcpys").get<std::uint64_t>()
            };
        }
        for (auto const& b : j.at("bursts")) {
            gt.bursts.push_back(
                TimeWindow{Timestamp{b.at(0).get<std::uint64_t>()}, Timestamp{b.at(1).get<std::uint64_t>()}}
            );
        }
        return gt;
    } catch (nlohmann::json::exception const& e) {
        fail(ErrorKind::MalformedFile, fmt::format("ground truth: {}", e.what()));
    }
}

void write_database(TraceRecords const& records, int kernel_names, std::filesystem::path const& path) {
    auto const tmp = std::filesystem::path{path.string() + ".tmp"};
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    {
        sqlite::Database db{tmp, sqlite::Mode::Create};
        db.exec("PRAGMA journal_mode=OFF");
        db.exec("PRAGMA synchronous=OFF");
        db.exec("BEGIN");
        db.exec("CREATE TABLE StringIds (id INTEGER PRIMARY KEY, value TEXT NOT NULL)");
        db.exec(fmt::format(
            "CREATE TABLE {} (start INTEGER NOT NULL, end INTEGER NOT NULL, deviceId INTEGER NOT NULL, "
            "streamId INTEGER NOT NULL, shortName INTEGER NOT NULL, gridX INTEGER, gridY INTEGER, "
            "gridZ INTEGER, blockX INTEGER, blockY INTEGER, blockZ INTEGER, registersPerThread INTEGER, "
            "staticSharedMemory INTEGER, dynamicSharedMemory INTEGER)",
            kKernelTable
        ));
        db.exec(fmt::format(
            "CREATE TABLE {} (start INTEGER NOT NULL, end INTEGER NOT NULL, deviceId INTEGER NOT NULL, "
            "streamId INTEGER NOT NULL, bytes INTEGER NOT NULL, copyKind INTEGER NOT NULL)",
            kMemcpyTable
        ));
        db.exec(fmt::format(
            "CREATE TABLE {} (id INTEGER NOT NULL, totalMemory INTEGER, memoryBandwidth INTEGER, "
            "smCount INTEGER, computeMajor INTEGER, computeMinor INTEGER)",
            kGpuTable
        ));

        auto names = db.prepare("INSERT INTO StringIds (id, value) VALUES (?, ?)");
        for (int i = 0; i < kernel_names; ++i) {
            names.bind(1, std::int64_t{i}).bind(2, fmt::format("synth_kernel_{:02d}", i));
            names.step();
            names.reset();
        }
        auto ins_k = db.prepare(fmt::format("INSERT INTO {} VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?)", kKernelTable));
        for (auto const& k : records.kernels) {
            int c = 1;
            ins_k.bind(c++, static_cast<std::int64_t>(k.start.ns()));
            ins_k.bind(c++, static_cast<std::int64_t>(k.end.ns()));
            ins_k.bind(c++, std::int64_t{k.device_id});
            ins_k.bind(c++, std::int64_t{k.stream_id});
            ins_k.bind(c++, k.name_id);
            for (auto g : k.grid) {
                ins_k.bind(c++, std::int64_t{g});
            }
            for (auto b : k.block) {
                ins_k.bind(c++, std::int64_t{b});
            }
            ins_k.bind(c++, std::int64_t{k.registers_per_thread});
            ins_k.bind(c++, k.shared_mem_bytes);
            ins_k.bind(c++, std::int64_t{0});
            ins_k.step();
            ins_k.reset();
        }
        auto ins_m = db.prepare(fmt::format("INSERT INTO {} VALUES (?,?,?,?,?,?)", kMemcpyTable));
        for (auto const& m : records.memcpys) {
            ins_m.bind(1, static_cast<std::int64_t>(m.start.ns()))
                .bind(2, static_cast<std::int64_t>(m.end.ns()))
                .bind(3, std::int64_t{m.device_id})
                .bind(4, std::int64_t{m.stream_id})
                .bind(5, static_cast<std::int64_t>(m.bytes))
                .bind(6, m.copy_kind.raw());
            ins_m.step();
            ins_m.reset();
        }
        auto ins_g = db.prepare(fmt::format("INSERT INTO {} VALUES (?,?,?,?,?,?)", kGpuTable));
        for (auto const& g : records.gpus) {
            ins_g.bind(1, std::int64_t{g.device_id})
                .bind(2, static_cast<std::int64_t>(g.global_mem_bytes))
                .bind(3, static_cast<std::int64_t>(g.bandwidth_kb_per_s))
                .bind(4, std::int64_t{g.sm_count})
                .bind(5, std::int64_t{g.compute_capability_major})
                .bind(6, std::int64_t{g.compute_capability_minor});
            ins_g.step();
            ins_g.reset();
        }
        db.exec(fmt::format("CREATE INDEX kernel_start ON {} (start)", kKernelTable));
        db.exec(fmt::format("CREATE INDEX memcpy_start ON {} (start)", kMemcpyTable));
        db.exec("COMMIT");
    }
    std::filesystem::rename(tmp, path, ec);
    SHARDPROF_EXPECTS(
        !ec, ErrorKind::IoError, fmt::format("cannot move database to {}: {}", path.string(), ec.message())
    );
}

std::pair<TraceDatabaseRef, GroundTruth> generate_db(
    SynthSpec const& spec, std::filesystem::path const& out_dir
) {
    auto const records = generate_records(spec);
    auto gt = ground_truth_of(spec, records);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    SHARDPROF_EXPECTS(
        !ec, ErrorKind::IoError, fmt::format("cannot create {}: {}", out_dir.string(), ec.message())
    );
    auto const db_path = out_dir / kDatabaseName;
    write_database(records, spec.kernel_names, db_path);
    write_file_atomic(out_dir / kGroundTruthName, gt.to_json().dump(2) + "\n");
    return {TraceDatabaseRef{db_path, 0}, std::move(gt)};
}

}  // namespace shardprof::synth
