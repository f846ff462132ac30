/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <random>

#include <benchmark/benchmark.h>

#include <shardprof/aggregation.hpp>
#include <shardprof/stats.hpp>
#include <shardprof/synth.hpp>

namespace {

using namespace shardprof;

void BM_Binning(benchmark::State& state) {
    synth::SynthSpec spec;
    spec.duration_s = 30;
    spec.kernels_per_s = 100;
    spec.memcpys_per_s = 20;
    spec.memcpy_duration_ns = static_cast<Nanoseconds>(state.range(0));
    auto const r = synth::generate_records(spec);
    auto const rows = left_join(r.kernels, r.memcpys, r.gpus);
    for (auto _ : state) {
        IntervalAccumulator acc{Timestamp{spec.origin_ns}, 1'000'000'000};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            acc.add(rows[i], i == 0 || !(rows[i - 1].kernel == rows[i].kernel));
        }
        benchmark::DoNotOptimize(acc.finalize());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
}
// Short transfers stay in one interval; long ones straddle several.
BENCHMARK(BM_Binning)->Arg(2'000'000)->Arg(2'500'000'000)->Unit(benchmark::kMillisecond);

void BM_PopulationStd(benchmark::State& state) {
    std::mt19937_64 rng{1};
    std::vector<std::uint64_t> xs(static_cast<std::size_t>(state.range(0)));
    for (auto& x : xs) {
        x = rng() % 1'000'000'000;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stats::population_std(std::span<std::uint64_t const>{xs}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PopulationStd)->Arg(1'000)->Arg(1'000'000);

void BM_IqrAnomalies(benchmark::State& state) {
    std::mt19937_64 rng{2};
    std::map<std::int64_t, double> metrics;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        metrics[i] = std::exponential_distribution<double>{1e-6}(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(iqr_anomalies(metrics, AggregationConfig{}));
    }
}
BENCHMARK(BM_IqrAnomalies)->Arg(64)->Arg(65'536);

void BM_TopIntervals(benchmark::State& state) {
    std::mt19937_64 rng{3};
    IntervalStatsMap stats;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.range(0)); ++i) {
        IntervalStats s;
        s.key = IntervalKey{i, Timestamp{i * 1'000'000'000}};
        s.sample_count = 1;
        s.stall_std = std::uniform_real_distribution<double>{0, 1e9}(rng);
        stats[i] = s;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(top_variability_intervals(stats, AggregationConfig{}));
    }
}
BENCHMARK(BM_TopIntervals)->Arg(200)->Arg(100'000);

}  // namespace
