/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <benchmark/benchmark.h>

#include <shardprof/partitioner.hpp>
#include <shardprof/synth.hpp>
#include <shardprof/trace_ingest.hpp>

namespace {

using namespace shardprof;

TraceRecords records_for(std::int64_t kernels, std::int64_t memcpys) {
    synth::SynthSpec spec;
    spec.duration_s = 10;
    spec.kernels_per_s = static_cast<double>(kernels) / spec.duration_s;
    spec.memcpys_per_s = static_cast<double>(memcpys) / spec.duration_s;
    spec.streams_per_device = 4;
    return synth::generate_records(spec);
}

void BM_JoinIndexBuild(benchmark::State& state) {
    auto const r = records_for(1000, state.range(0));
    for (auto _ : state) {
        JoinIndex index{r.memcpys, r.gpus};
        benchmark::DoNotOptimize(index);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_JoinIndexBuild)->Arg(1'000)->Arg(100'000);

void BM_JoinStream(benchmark::State& state) {
    auto const r = records_for(state.range(0), state.range(1));
    JoinIndex const index{r.memcpys, r.gpus};
    std::uint64_t rows = 0;
    for (auto _ : state) {
        JoinStream stream{r.kernels, index};
        while (auto s = stream.next()) {
            benchmark::DoNotOptimize(*s);
            ++rows;
        }
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_JoinStream)->Args({10'000, 0})->Args({10'000, 400})->Args({2'000, 2'000});

void BM_ShardOf(benchmark::State& state) {
    PartitionConfig const cfg{state.range(0), 4, Timestamp{1'000}, Timestamp{1'000'000'000'000}};
    std::uint64_t t = 1'000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(shard_of(Timestamp{t}, cfg));
        t = 1'000 + (t * 6364136223846793005ull + 1) % (1'000'000'000'000 - 1'000);
    }
}
BENCHMARK(BM_ShardOf)->Arg(8)->Arg(4096);

}  // namespace
