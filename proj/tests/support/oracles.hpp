/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <shardprof/partitioner.hpp>
#include <shardprof/trace_ingest.hpp>
#include <shardprof/trace_model.hpp>

namespace shardprof::testing {

/// O(n*m) left join: kernels in order, each against every memcpy of its key in order.
std::vector<JoinedSample> nested_loop_join(
    std::vector<KernelRecord> const& kernels,
    std::vector<MemcpyRecord> const& memcpys,
    std::vector<GpuInfo> const& gpus
);

/// sqrt(sum((x - mean)^2) / n), mean computed first.
double two_pass_std(std::vector<double> const& xs);

/// Type-7 quantile by sorting a copy and interpolating between neighbours.
double brute_quantile(std::vector<double> xs, double p);

/// Index of the window containing t, by walking every shard.
std::int64_t linear_scan_shard(Timestamp t, std::vector<ShardSpec> const& shards);

/// floor((t - t0) / step) by repeated subtraction (use with small ratios).
std::uint64_t repeated_subtraction_interval(std::uint64_t t, std::uint64_t t0, std::uint64_t step);

/// Per-interval view of joined samples, rebuilt from first principles.
struct OracleInterval {
    std::vector<double> samples;
    std::uint64_t kernels{0};
    std::map<std::int64_t, std::uint64_t> counts;
    std::map<std::int64_t, std::uint64_t> bytes;
};

/// Walk every interval a memcpy touches and record the clipped overlap.
std::map<std::uint64_t, OracleInterval> interval_bins(
    std::vector<JoinedSample> const& rows, std::uint64_t t0, std::uint64_t step
);

/// Shard-file round trip of a sample: memcpy key follows the kernel, GPU keeps SM count and memory.
JoinedSample as_stored(JoinedSample s);

/// Comparable flattening of a sample for multiset checks.
std::vector<std::int64_t> row_key(JoinedSample const& s);
std::vector<std::vector<std::int64_t>> sorted_keys(std::vector<JoinedSample> const& rows);

struct RandomTraceShape {
    std::size_t max_kernels{200};
    std::size_t max_memcpys{100};
    int min_devices{1};
    int max_devices{3};
    int min_streams{1};
    int max_streams{3};
    std::uint64_t span_ns{1'000'000};
    int copy_kind_choices{4};
};

/// Random records with keys drawn from a small pool so multiplicities vary.
TraceRecords random_records(std::mt19937_64& rng, RandomTraceShape const& shape);

class TempDir {
  public:
    explicit TempDir(std::string const& tag = "shardprof-test");
    ~TempDir();
    TempDir(TempDir const&) = delete;
    TempDir& operator=(TempDir const&) = delete;

    [[nodiscard]] std::filesystem::path const& path() const noexcept {
        return path_;
    }
    [[nodiscard]] std::filesystem::path operator/(std::string const& name) const {
        return path_ / name;
    }

  private:
    std::filesystem::path path_;
};

}  // namespace shardprof::testing
