/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <fstream>
#include <mutex>
#include <random>

#include <gtest/gtest.h>

#include <shardprof/generation.hpp>
#include <shardprof/manifest.hpp>
#include <shardprof/shard_file.hpp>
#include <shardprof/synth.hpp>

#include "../support/expect_error.hpp"
#include "../support/oracles.hpp"

using namespace shardprof;
namespace oracle = shardprof::testing;
using oracle::TempDir;

namespace {

struct Run {
    std::vector<GenerationResult> per_rank;
    Manifest manifest;
};

Run generate(TraceDatabaseRef const& db, std::int64_t n, int p, std::filesystem::path const& out) {
    auto const range = scan_kernel_time_range(db);
    PartitionConfig const cfg{n, p, range.begin, range.end};
    Run run;
    run.per_rank.resize(static_cast<std::size_t>(p));
    std::mutex mu;
    run_in_process(p, [&](Communicator& comm) {
        auto r = run_generation(db, cfg, comm, out);
        std::lock_guard lock{mu};
        run.per_rank[static_cast<std::size_t>(comm.ctx().rank)] = std::move(r);
    });
    run.manifest = *run.per_rank[0].manifest;
    return run;
}

std::vector<JoinedSample> all_rows(Manifest const& m, std::filesystem::path const& dir) {
    std::vector<JoinedSample> rows;
    for (auto const& f : m.files) {
        auto part = ShardFileReader{dir / f.path}.read_all();
        EXPECT_EQ(part.size(), f.row_count);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<JoinedSample> oracle_rows(TraceDatabaseRef const& db) {
    auto const range = scan_kernel_time_range(db);
    auto const r = load_records(db, range);
    TraceReader reader{db};
    std::vector<JoinedSample> out;
    for (auto const& s : oracle::nested_loop_join(r.kernels, reader.load_memcpys(), r.gpus)) {
        out.push_back(oracle::as_stored(s));
    }
    return out;
}

TraceDatabaseRef small_db(TempDir const& dir, double duration = 1.0) {
    synth::SynthSpec spec;
    spec.duration_s = duration;
    spec.kernels_per_s = 100;
    spec.memcpys_per_s = 20;
    return synth::generate_db(spec, dir / "db").first;
}

}  // namespace

TEST(ShardFile, NameFormat) {
    EXPECT_EQ(shard_file_name(0, 0), "rank0000_shard000000.parquet");
    EXPECT_EQ(shard_file_name(12, 3456), "rank0012_shard003456.parquet");
}

TEST(ShardFile, SchemaColumnOrder) {
    std::vector<std::string> names;
    std::vector<bool> nullable;
    for (auto const& c : shard_schema()) {
        names.push_back(c.name);
        nullable.push_back(c.nullable);
    }
    EXPECT_EQ(
        names,
        (std::vector<std::string>{
            "kernel_start", "kernel_end", "device_id", "stream_id", "kernel_name_id", "grid_x", "grid_y",
            "grid_z", "block_x", "block_y", "block_z", "regs_per_thread", "smem_bytes", "memcpy_start",
            "memcpy_end", "memcpy_bytes", "copy_kind_raw", "gpu_sm_count", "gpu_mem_bytes"})
    );
    for (std::size_t i = 0; i < names.size(); ++i) {
        EXPECT_EQ(nullable[i], i >= 13) << names[i];
    }
}

TEST(ShardFile, RecordRoundTrip) {
    TempDir dir;
    std::mt19937_64 rng{4};
    for (int trial = 0; trial < 20; ++trial) {
        auto const r = oracle::random_records(rng, {});
        auto const joined = left_join(r.kernels, r.memcpys, r.gpus);
        ShardFileWriter w{dir / "s.parquet", {parquet::Codec::Gzip, 37}};
        for (auto const& s : joined) {
            w.write(s);
        }
        EXPECT_EQ(w.close(), joined.size());
        auto const back = ShardFileReader{dir / "s.parquet"}.read_all();
        ASSERT_EQ(back.size(), joined.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            EXPECT_EQ(back[i], oracle::as_stored(joined[i])) << i;
        }
    }
}

TEST(ShardFile, ForeignSchemaRejected) {
    TempDir dir;
    parquet::Writer w{dir / "x.parquet", {{"a", parquet::PhysicalType::Int64, false, false}}};
    w.close();
    EXPECT_ERROR_KIND(ShardFileReader{dir / "x.parquet"}, ErrorKind::SchemaMismatch);
}

TEST(Generation, SingleShardMatchesOracle) {
    TempDir dir;
    auto const db = small_db(dir);
    auto const run = generate(db, 1, 1, dir / "out");
    ASSERT_EQ(run.manifest.files.size(), 1u);
    auto const rows = all_rows(run.manifest, dir / "out");
    auto const expect = oracle_rows(db);
    EXPECT_EQ(run.manifest.files[0].row_count, expect.size());
    EXPECT_EQ(oracle::sorted_keys(rows), oracle::sorted_keys(expect));
}

TEST(Generation, BlocksAndConservation) {
    TempDir dir;
    auto const db = small_db(dir);
    auto const one = generate(db, 1, 1, dir / "one");
    auto const run = generate(db, 4, 2, dir / "four");
    ASSERT_EQ(run.per_rank[0].files.size(), 2u);
    ASSERT_EQ(run.per_rank[1].files.size(), 2u);
    EXPECT_EQ(run.per_rank[0].files[0].shard_index, 0);
    EXPECT_EQ(run.per_rank[0].files[1].shard_index, 1);
    EXPECT_EQ(run.per_rank[1].files[0].shard_index, 2);
    EXPECT_EQ(run.per_rank[1].files[1].shard_index, 3);
    EXPECT_TRUE(std::filesystem::exists(dir / "four" / "rank0001_shard000003.parquet"));
    EXPECT_FALSE(run.per_rank[1].manifest.has_value());

    std::uint64_t total = 0;
    for (auto const& f : run.manifest.files) {
        total += f.row_count;
    }
    EXPECT_EQ(total, one.manifest.files[0].row_count);
    EXPECT_EQ(
        oracle::sorted_keys(all_rows(run.manifest, dir / "four")),
        oracle::sorted_keys(all_rows(one.manifest, dir / "one"))
    );
}

TEST(Generation, ShardRowsLieInWindow) {
    TempDir dir;
    auto const db = small_db(dir, 3.0);
    auto const run = generate(db, 7, 3, dir / "out");
    for (auto const& f : run.manifest.files) {
        for (auto const& s : ShardFileReader{dir / "out" / f.path}.read_all()) {
            EXPECT_TRUE(f.window.contains(s.kernel.start));
        }
    }
}

TEST(Generation, EmptyShardStillWritten) {
    TempDir dir;
    TraceRecords r;
    for (std::uint64_t t : {0, 5, 990, 995}) {
        KernelRecord k;
        k.start = Timestamp{t};
        k.end = Timestamp{t + 4};
        r.kernels.push_back(k);
    }
    synth::write_database(r, 1, dir / "gap.sqlite");
    TraceDatabaseRef const db{dir / "gap.sqlite", 0};
    auto const run = generate(db, 10, 2, dir / "out");
    ASSERT_EQ(run.manifest.files.size(), 10u);
    EXPECT_EQ(run.manifest.files[5].row_count, 0u);
    EXPECT_EQ(ShardFileReader{dir / "out" / run.manifest.files[5].path}.num_rows(), 0u);
    EXPECT_EQ(run.manifest.files[0].row_count, 2u);
}

TEST(Generation, ManifestContents) {
    TempDir dir;
    auto const db = small_db(dir);
    auto const run = generate(db, 6, 3, dir / "out");
    auto const loaded = Manifest::load(dir / "out" / kManifestName);
    EXPECT_EQ(loaded, run.manifest);
    auto const j = nlohmann::json::parse(read_text_file(dir / "out" / kManifestName));
    for (auto const* key : {"config", "t0", "t1", "files", "timings"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["files"].size(), 6u);
    EXPECT_EQ(j["timings"].size(), 3u);
    EXPECT_TRUE(j["timings"]["2"].contains("generation_ns"));
    EXPECT_EQ(j["t0"].get<std::uint64_t>(), scan_kernel_time_range(db).begin.ns());
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / kKernelNamesName));
}

TEST(Generation, RerunIsDeterministic) {
    TempDir dir;
    auto const db = small_db(dir, 2.0);
    auto const a = generate(db, 5, 2, dir / "a");
    auto const b = generate(db, 5, 2, dir / "b");
    for (std::size_t i = 0; i < a.manifest.files.size(); ++i) {
        auto const ra = ShardFileReader{dir / "a" / a.manifest.files[i].path}.read_all();
        auto const rb = ShardFileReader{dir / "b" / b.manifest.files[i].path}.read_all();
        EXPECT_EQ(ra, rb);
    }
}

TEST(Generation, ConflictingManifestRefused) {
    TempDir dir;
    auto const db = small_db(dir);
    (void)generate(db, 4, 1, dir / "out");
    EXPECT_ERROR_KIND((void)generate(db, 5, 1, dir / "out"), ErrorKind::ManifestConflict);
}

TEST(Generation, DifferentWorkerCountReplacesShards) {
    TempDir dir;
    auto const db = small_db(dir);
    (void)generate(db, 4, 4, dir / "out");
    auto const run = generate(db, 4, 1, dir / "out");
    std::size_t files = 0;
    for (auto const& e : std::filesystem::directory_iterator{dir / "out"}) {
        files += e.path().extension() == ".parquet";
    }
    EXPECT_EQ(files, 4u);
    EXPECT_EQ(run.manifest.timings.size(), 1u);
}

TEST(Generation, RangeMustMatchTrace) {
    TempDir dir;
    auto const db = small_db(dir);
    auto const range = scan_kernel_time_range(db);
    PartitionConfig const cfg{2, 1, range.begin, range.end.plus(1)};
    EXPECT_ERROR_KIND(
        run_in_process(1, [&](Communicator& c) { (void)run_generation(db, cfg, c, dir / "out"); }),
        ErrorKind::InvalidRange
    );
}

TEST(Generation, WorkerCountMustMatchJob) {
    TempDir dir;
    auto const db = small_db(dir);
    auto const range = scan_kernel_time_range(db);
    PartitionConfig const cfg{2, 3, range.begin, range.end};
    EXPECT_ERROR_KIND(
        run_in_process(2, [&](Communicator& c) { (void)run_generation(db, cfg, c, dir / "out"); }),
        ErrorKind::InvalidArgument
    );
}

TEST(Manifest, HashIgnoresWorkerCount) {
    PartitionConfig a{8, 1, Timestamp{0}, Timestamp{100}};
    PartitionConfig b{8, 4, Timestamp{0}, Timestamp{100}};
    PartitionConfig c{9, 1, Timestamp{0}, Timestamp{100}};
    PartitionConfig d{8, 1, Timestamp{0}, Timestamp{101}};
    EXPECT_EQ(partition_hash(a), partition_hash(b));
    EXPECT_NE(partition_hash(a), partition_hash(c));
    EXPECT_NE(partition_hash(a), partition_hash(d));
}

TEST(Manifest, TamperedHashRejected) {
    TempDir dir;
    Manifest m;
    m.config = PartitionConfig{2, 1, Timestamp{0}, Timestamp{10}};
    m.save(dir / "m.json");
    auto j = nlohmann::json::parse(read_text_file(dir / "m.json"));
    j["config"]["num_shards"] = 3;
    std::ofstream{dir / "m.json"} << j.dump();
    EXPECT_ERROR_KIND((void)Manifest::load(dir / "m.json"), ErrorKind::ManifestMismatch);
    std::ofstream{dir / "bad.json"} << "{";
    EXPECT_ERROR_KIND((void)Manifest::load(dir / "bad.json"), ErrorKind::MalformedFile);
}
