/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <chrono>
#include <regex>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <shardprof/error.hpp>
#include <shardprof/generation.hpp>
#include <shardprof/partitioner.hpp>
#include <shardprof/serialize.hpp>
#include <shardprof/shard_file.hpp>

namespace shardprof {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point since) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count()
    );
}

Bytes encode_agreement(
    PartitionConfig const& cfg, TraceDatabaseRef const& db, std::optional<TimeWindow> scanned
) {
    ByteWriter w;
    w.put<std::int64_t>(cfg.num_shards);
    w.put<std::int64_t>(cfg.num_workers);
    w.put<std::uint64_t>(cfg.range_start.ns());
    w.put<std::uint64_t>(cfg.range_end.ns());
    w.put_string(std::filesystem::absolute(db.path).lexically_normal().string());
    w.put<std::uint8_t>(scanned.has_value());
    if (scanned) {
        w.put<std::uint64_t>(scanned->begin.ns());
        w.put<std::uint64_t>(scanned->end.ns());
    }
    return std::move(w).take();
}

Bytes encode_files(std::vector<ShardFileMeta> const& files, std::uint64_t wall_ns) {
    ByteWriter w;
    w.put<std::uint64_t>(wall_ns);
    w.put<std::uint64_t>(files.size());
    for (auto const& f : files) {
        w.put<std::int32_t>(f.rank);
        w.put<std::int64_t>(f.shard_index);
        w.put_string(f.path.generic_string());
        w.put<std::uint64_t>(f.row_count);
        w.put<std::uint64_t>(f.window.begin.ns());
        w.put<std::uint64_t>(f.window.end.ns());
        w.put<std::uint64_t>(f.wall_time_ns);
    }
    return std::move(w).take();
}

std::vector<ShardFileMeta> decode_files(Bytes const& data, std::uint64_t& wall_ns) {
    ByteReader r{data};
    wall_ns = r.get<std::uint64_t>();
    auto const n = r.get<std::uint64_t>();
    std::vector<ShardFileMeta> out;
    for (std::uint64_t i = 0; i < n; ++i) {
        ShardFileMeta f;
        f.rank = r.get<std::int32_t>();
        f.shard_index = r.get<std::int64_t>();
        f.path = r.get_string();
        f.row_count = r.get<std::uint64_t>();
        auto const b = r.get<std::uint64_t>();
        auto const e = r.get<std::uint64_t>();
        f.window = TimeWindow{Timestamp{b}, Timestamp{e}};
        f.wall_time_ns = r.get<std::uint64_t>();
        out.push_back(std::move(f));
    }
    return out;
}

char const* codec_name(parquet::Codec c) {
    return c == parquet::Codec::Gzip ? "gzip" : "uncompressed";
}

/// Drop shard files left behind by an earlier run with a different worker count.
void remove_stale_shards(std::filesystem::path const& dir, std::vector<ShardFileMeta> const& keep) {
    static std::regex const pattern{R"(rank\d{4}_shard\d{6}\.parquet)"};
    std::set<std::string> wanted;
    for (auto const& f : keep) {
        wanted.insert(f.path.filename().string());
    }
    for (auto const& entry : std::filesystem::directory_iterator{dir}) {
        auto const name = entry.path().filename().string();
        if (std::regex_match(name, pattern) && !wanted.contains(name)) {
            std::filesystem::remove(entry.path());
        }
    }
}

}  // namespace

GenerationResult run_generation(
    TraceDatabaseRef const& db,
    PartitionConfig const& cfg,
    Communicator& comm,
    std::filesystem::path const& out_dir,
    GenerationOptions const& options
) {
    auto const started = Clock::now();
    auto const& ctx = comm.ctx();
    cfg.validate();
    SHARDPROF_EXPECTS(
        cfg.num_workers == ctx.world_size,
        ErrorKind::InvalidArgument,
        fmt::format("config expects {} workers, job has {}", cfg.num_workers, ctx.world_size)
    );

    auto const manifest_path = out_dir / kManifestName;
    if (std::filesystem::exists(manifest_path)) {
        auto const previous = Manifest::load(manifest_path);
        SHARDPROF_EXPECTS(
            previous.config_hash() == partition_hash(cfg),
            ErrorKind::ManifestConflict,
            fmt::format(
                "{} was written for N={} range=[{}, {}); refusing to mix with N={} range=[{}, {})",
                manifest_path.string(),
                previous.config.num_shards,
                previous.config.range_start.ns(),
                previous.config.range_end.ns(),
                cfg.num_shards,
                cfg.range_start.ns(),
                cfg.range_end.ns()
            )
        );
    }

    TraceReader reader{db};
    std::optional<TimeWindow> scanned;
    if (ctx.is_root()) {
        scanned = reader.scan_kernel_time_range();
    }

    // Leading agreement: every rank sees every rank's view of the job.
    auto const views = all_gather(comm, encode_agreement(cfg, db, scanned));
    std::optional<TimeWindow> root_range;
    for (std::size_t r = 0; r < views.size(); ++r) {
        ByteReader rd{views[r]};
        PartitionConfig other;
        other.num_shards = rd.get<std::int64_t>();
        other.num_workers = rd.get<std::int64_t>();
        other.range_start = Timestamp{rd.get<std::uint64_t>()};
        other.range_end = Timestamp{rd.get<std::uint64_t>()};
        auto const path = rd.get_string();
        SHARDPROF_EXPECTS(
            other == cfg && path == std::filesystem::absolute(db.path).lexically_normal().string(),
            ErrorKind::InvalidArgument,
            fmt::format("rank {} disagrees with rank {} on the generation config", r, ctx.rank)
        );
        if (rd.get<std::uint8_t>() != 0) {
            auto const b = rd.get<std::uint64_t>();
            auto const e = rd.get<std::uint64_t>();
            root_range = TimeWindow{Timestamp{b}, Timestamp{e}};
        }
    }
    SHARDPROF_EXPECTS(root_range.has_value(), ErrorKind::InvalidArgument, "root did not scan");
    SHARDPROF_EXPECTS(
        root_range->begin == cfg.range_start && root_range->end == cfg.range_end,
        ErrorKind::InvalidRange,
        fmt::format(
            "config range [{}, {}) does not match kernel range [{}, {}) of {}",
            cfg.range_start.ns(),
            cfg.range_end.ns(),
            root_range->begin.ns(),
            root_range->end.ns(),
            db.path.string()
        )
    );

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    SHARDPROF_EXPECTS(
        std::filesystem::is_directory(out_dir),
        ErrorKind::IoError,
        fmt::format("cannot create output directory {}", out_dir.string())
    );

    GenerationResult result;
    auto const memcpys = reader.load_memcpys();
    auto const gpus = reader.load_gpus();
    JoinIndex const index{memcpys, gpus};
    result.largest_memcpy_group = index.largest_group();

    auto const shards = make_shards(cfg);
    auto const block = block_of(cfg, ctx.rank);
    for (auto s = block.first; s < block.last; ++s) {
        auto const shard_started = Clock::now();
        auto const& spec = shards[static_cast<std::size_t>(s)];
        auto const kernels = reader.load_kernels(spec.window);
        result.peak_shard_kernels = std::max<std::uint64_t>(result.peak_shard_kernels, kernels.size());

        auto const name = shard_file_name(ctx.rank, s);
        ShardFileWriter writer{out_dir / name, options.writer};
        JoinStream stream{kernels, index};
        while (auto sample = stream.next()) {
            writer.write(*sample);
        }
        ShardFileMeta meta;
        meta.rank = ctx.rank;
        meta.shard_index = s;
        meta.path = name;
        meta.row_count = writer.close();
        meta.window = spec.window;
        meta.wall_time_ns = elapsed_ns(shard_started);
        result.files.push_back(std::move(meta));
    }

    if (ctx.is_root()) {
        nlohmann::ordered_json names = nlohmann::ordered_json::object();
        for (auto const& [id, text] : reader.kernel_names()) {
            names[std::to_string(id)] = text;
        }
        write_file_atomic(out_dir / kKernelNamesName, names.dump(2) + "\n");
    }

    result.wall_time_ns = elapsed_ns(started);

    // Trailing merge: rank 0 assembles the manifest.
    auto gathered = comm.gather_to_root(encode_files(result.files, result.wall_time_ns));
    if (gathered) {
        Manifest m;
        m.config = cfg;
        m.db_path = db.path.string();
        m.trace_label = db.profiling_rank_label;
        m.codec = codec_name(options.writer.codec);
        for (std::size_t r = 0; r < gathered->size(); ++r) {
            std::uint64_t wall = 0;
            auto files = decode_files((*gathered)[r], wall);
            m.timings[static_cast<int>(r)].generation_ns = wall;
            for (auto& f : files) {
                m.files.push_back(std::move(f));
            }
        }
        std::sort(m.files.begin(), m.files.end(), [](auto const& a, auto const& b) {
            return a.shard_index < b.shard_index;
        });
        SHARDPROF_EXPECTS(
            m.files.size() == static_cast<std::size_t>(cfg.num_shards),
            ErrorKind::IoError,
            fmt::format("expected {} shard files, ranks reported {}", cfg.num_shards, m.files.size())
        );
        remove_stale_shards(out_dir, m.files);
        m.save(manifest_path);
        spdlog::debug("generation: wrote {} shard files to {}", m.files.size(), out_dir.string());
        result.manifest = std::move(m);
    }
    comm.barrier();
    return result;
}

}  // namespace shardprof
