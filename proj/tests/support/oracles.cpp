/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>

#include <unistd.h>

#include "oracles.hpp"

namespace shardprof::testing {

std::vector<JoinedSample> nested_loop_join(
    std::vector<KernelRecord> const& kernels,
    std::vector<MemcpyRecord> const& memcpys,
    std::vector<GpuInfo> const& gpus
) {
    std::vector<JoinedSample> out;
    for (auto const& k : kernels) {
        std::optional<GpuInfo> gpu;
        for (auto const& g : gpus) {
            if (g.device_id == k.device_id) {
                gpu = g;
            }
        }
        bool matched = false;
        for (auto const& m : memcpys) {
            if (m.device_id == k.device_id && m.stream_id == k.stream_id) {
                out.push_back(JoinedSample{k, m, gpu});
                matched = true;
            }
        }
        if (!matched) {
            out.push_back(JoinedSample{k, std::nullopt, gpu});
        }
    }
    return out;
}

double two_pass_std(std::vector<double> const& xs) {
    if (xs.empty()) {
        return 0.0;
    }
    long double sum = 0;
    for (auto x : xs) {
        sum += x;
    }
    long double const mean = sum / static_cast<long double>(xs.size());
    long double sq = 0;
    for (auto x : xs) {
        sq += (x - mean) * (x - mean);
    }
    return static_cast<double>(std::sqrt(sq / static_cast<long double>(xs.size())));
}

double brute_quantile(std::vector<double> xs, double p) {
    std::sort(xs.begin(), xs.end());
    double const h = p * static_cast<double>(xs.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(h));
    auto const hi = static_cast<std::size_t>(std::ceil(h));
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

std::int64_t linear_scan_shard(Timestamp t, std::vector<ShardSpec> const& shards) {
    for (auto const& s : shards) {
        if (s.window.begin <= t && t < s.window.end) {
            return s.index;
        }
    }
    if (!shards.empty() && t == shards.back().window.end) {
        return shards.back().index;
    }
    return -1;
}

std::uint64_t repeated_subtraction_interval(std::uint64_t t, std::uint64_t t0, std::uint64_t step) {
    std::uint64_t index = 0;
    std::uint64_t rest = t - t0;
    while (rest >= step) {
        rest -= step;
        ++index;
    }
    return index;
}

JoinedSample as_stored(JoinedSample s) {
    if (s.memcpy) {
        s.memcpy->device_id = s.kernel.device_id;
        s.memcpy->stream_id = s.kernel.stream_id;
    }
    if (s.gpu) {
        GpuInfo g;
        g.device_id = s.kernel.device_id;
        g.sm_count = s.gpu->sm_count;
        g.global_mem_bytes = s.gpu->global_mem_bytes;
        s.gpu = g;
    }
    return s;
}

std::vector<std::int64_t> row_key(JoinedSample const& s) {
    auto const& k = s.kernel;
    std::vector<std::int64_t> v{
        static_cast<std::int64_t>(k.start.ns()),
        static_cast<std::int64_t>(k.end.ns()),
        k.device_id,
        k.stream_id,
        k.name_id,
        k.grid[0],
        k.grid[1],
        k.grid[2],
        k.block[0],
        k.block[1],
        k.block[2],
        k.registers_per_thread,
        k.shared_mem_bytes,
    };
    if (s.memcpy) {
        v.insert(
            v.end(),
            {1,
             static_cast<std::int64_t>(s.memcpy->start.ns()),
             static_cast<std::int64_t>(s.memcpy->end.ns()),
             static_cast<std::int64_t>(s.memcpy->bytes),
             s.memcpy->copy_kind.raw(),
             s.memcpy->device_id,
             s.memcpy->stream_id}
        );
    } else {
        v.push_back(0);
    }
    if (s.gpu) {
        v.insert(
            v.end(),
            {1,
             s.gpu->device_id,
             s.gpu->sm_count,
             static_cast<std::int64_t>(s.gpu->global_mem_bytes),
             static_cast<std::int64_t>(s.gpu->bandwidth_kb_per_s),
             s.gpu->compute_capability_major,
             s.gpu->compute_capability_minor}
        );
    } else {
        v.push_back(0);
    }
    return v;
}

std::vector<std::vector<std::int64_t>> sorted_keys(std::vector<JoinedSample> const& rows) {
    std::vector<std::vector<std::int64_t>> out;
    out.reserve(rows.size());
    for (auto const& r : rows) {
        out.push_back(row_key(r));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::map<std::uint64_t, OracleInterval> interval_bins(
    std::vector<JoinedSample> const& rows, std::uint64_t t0, std::uint64_t step
) {
    std::map<std::uint64_t, OracleInterval> out;
    std::optional<KernelRecord> prev;
    for (auto const& s : rows) {
        if (!prev || !(*prev == s.kernel)) {
            ++out[repeated_subtraction_interval(std::max(s.kernel.start.ns(), t0), t0, step)].kernels;
            prev = s.kernel;
        }
        if (!s.memcpy) {
            continue;
        }
        auto const& m = *s.memcpy;
        auto const home = (std::max(m.start.ns(), t0) - t0) / step;
        out[home].counts[m.copy_kind.raw()] += 1;
        out[home].bytes[m.copy_kind.raw()] += m.bytes;
        bool any = false;
        for (std::uint64_t i = home; t0 + i * step < m.end.ns(); ++i) {
            auto const lo = std::max(m.start.ns(), t0 + i * step);
            auto const hi = std::min(m.end.ns(), t0 + (i + 1) * step);
            if (lo < hi) {
                out[i].samples.push_back(static_cast<double>(hi - lo));
                any = true;
            }
        }
        if (!any) {
            out[home].samples.push_back(0.0);
        }
    }
    return out;
}

TraceRecords random_records(std::mt19937_64& rng, RandomTraceShape const& shape) {
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>{lo, hi}(rng);
    };
    TraceRecords r;
    int const devices = static_cast<int>(pick(static_cast<std::uint64_t>(shape.min_devices), static_cast<std::uint64_t>(shape.max_devices)));
    int const streams = static_cast<int>(pick(static_cast<std::uint64_t>(shape.min_streams), static_cast<std::uint64_t>(shape.max_streams)));
    auto const n_k = pick(1, shape.max_kernels);
    auto const n_m = pick(0, shape.max_memcpys);
    std::int64_t const kinds[] = {1, 2, 8, 3, 10, 42};
    for (std::uint64_t i = 0; i < n_k; ++i) {
        KernelRecord k;
        k.start = Timestamp{pick(0, shape.span_ns)};
        k.end = k.start.plus(pick(0, shape.span_ns / 50));
        k.device_id = static_cast<std::int32_t>(pick(0, static_cast<std::uint64_t>(devices - 1)));
        k.stream_id = static_cast<std::int32_t>(pick(0, static_cast<std::uint64_t>(streams - 1)));
        k.name_id = static_cast<std::int64_t>(pick(0, 5));
        k.grid = {static_cast<std::int32_t>(pick(1, 64)), static_cast<std::int32_t>(pick(1, 4)), 1};
        k.block = {static_cast<std::int32_t>(pick(1, 1024)), 1, 1};
        k.registers_per_thread = static_cast<std::int32_t>(pick(0, 255));
        k.shared_mem_bytes = static_cast<std::int64_t>(pick(0, 65536));
        r.kernels.push_back(k);
    }
    for (std::uint64_t i = 0; i < n_m; ++i) {
        MemcpyRecord m;
        m.start = Timestamp{pick(0, shape.span_ns)};
        m.end = m.start.plus(pick(0, shape.span_ns / 20));
        m.device_id = static_cast<std::int32_t>(pick(0, static_cast<std::uint64_t>(devices)));
        m.stream_id = static_cast<std::int32_t>(pick(0, static_cast<std::uint64_t>(streams - 1)));
        m.bytes = pick(0, 1 << 20);
        m.copy_kind = decode_copy_kind(kinds[pick(0, static_cast<std::uint64_t>(shape.copy_kind_choices - 1))]);
        r.memcpys.push_back(m);
    }
    // Device `devices - 1` has no GPU row when the coin says so.
    int const with_gpu = pick(0, 1) == 0 ? devices : devices - 1;
    for (int d = 0; d < with_gpu; ++d) {
        GpuInfo g;
        g.device_id = d;
        g.global_mem_bytes = pick(1, 1ull << 36);
        g.bandwidth_kb_per_s = pick(1, 1ull << 30);
        g.sm_count = static_cast<std::int32_t>(pick(1, 132));
        g.compute_capability_major = 8;
        g.compute_capability_minor = static_cast<std::int32_t>(pick(0, 9));
        r.gpus.push_back(g);
    }
    return r;
}

TempDir::TempDir(std::string const& tag) {
    auto pattern = (std::filesystem::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (::mkdtemp(pattern.data()) == nullptr) {
        throw std::runtime_error{"mkdtemp failed"};
    }
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace shardprof::testing
