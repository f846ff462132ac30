/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <unistd.h>

#include <benchmark/benchmark.h>

#include <shardprof/shard_file.hpp>
#include <shardprof/synth.hpp>

namespace {

using namespace shardprof;

std::vector<JoinedSample> sample_rows(std::size_t n) {
    synth::SynthSpec spec;
    spec.duration_s = 10;
    spec.kernels_per_s = 200;
    spec.memcpys_per_s = 40;
    auto const r = synth::generate_records(spec);
    auto rows = left_join(r.kernels, r.memcpys, r.gpus);
    rows.resize(std::min(rows.size(), n));
    return rows;
}

std::filesystem::path scratch(char const* name) {
    return std::filesystem::temp_directory_path()
           / (std::string{"shardprof-bench-"} + std::to_string(::getpid()) + "-" + name);
}

void BM_ShardWrite(benchmark::State& state) {
    auto const rows = sample_rows(100'000);
    auto const path = scratch("write.parquet");
    parquet::WriterOptions opts;
    opts.codec = static_cast<parquet::Codec>(state.range(0));
    for (auto _ : state) {
        ShardFileWriter w{path, opts};
        for (auto const& s : rows) {
            w.write(s);
        }
        benchmark::DoNotOptimize(w.close());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
    state.counters["bytes"] = static_cast<double>(std::filesystem::file_size(path));
    std::filesystem::remove(path);
}
BENCHMARK(BM_ShardWrite)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ShardRead(benchmark::State& state) {
    auto const rows = sample_rows(100'000);
    auto const path = scratch("read.parquet");
    {
        ShardFileWriter w{path};
        for (auto const& s : rows) {
            w.write(s);
        }
        w.close();
    }
    for (auto _ : state) {
        std::uint64_t n = 0;
        ShardFileReader{path}.for_each([&](JoinedSample const&) { ++n; });
        benchmark::DoNotOptimize(n);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
    std::filesystem::remove(path);
}
BENCHMARK(BM_ShardRead)->Unit(benchmark::kMillisecond);

}  // namespace
